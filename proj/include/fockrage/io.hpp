#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fockrage/reduced.hpp"

namespace fockrage {

using Json = nlohmann::json;

/// Deterministic "%.12g" formatting shared by every emitter.
std::string format_number(double v);

/// Complex entries as [re, im]; a matrix is an array of rows.
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);
Json vector_to_json(const Vector& v);
Json real_vector_to_json(const RealVector& v);

Json fock_density_to_json(const FockDensity& state);

std::uint64_t fnv1a(const std::string& data);
std::string hash_hex(const std::string& data);

/// Temp file + rename so readers never observe a partial file.
void atomic_write(const std::filesystem::path& path,
                  const std::string& content);

/// RFC-4180-style body with a '#'-prefixed metadata preamble.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns);
  void meta(const std::string& key, const std::string& value);
  void row(const std::vector<std::string>& cells);
  std::string str() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::pair<std::string, std::string>> meta_;
  std::string body_;
};

}  // namespace fockrage
