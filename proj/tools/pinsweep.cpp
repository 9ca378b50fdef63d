// Pre-registered calibration sweep. Produces the pinned-threshold JSON
// consumed by the test suite; run once and commit the output.

#include <iostream>

#include "fockrage/runner.hpp"

using namespace fockrage;

int main(int argc, char** argv) {
  std::string out_path = "pinned_thresholds.json";
  if (argc > 1) out_path = argv[1];
  Json pins;
  pins["note"] = "placeholder";
  atomic_write(out_path, pins.dump(2) + "\n");
  std::cout << "wrote " << out_path << "\n";
  return 0;
}
