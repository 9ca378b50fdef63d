#include "fockrage/runner.hpp"

int main(int argc, char** argv) { return fockrage::cli_main(argc, argv); }
