#pragma once

#include <map>
#include <string>
#include <vector>

#include "fabricnet/predict.hpp"
#include "fabricnet/slicing.hpp"

namespace fabricnet::io {

// Versioned flat file of named records. Line-based text: a magic/version
// line, a kind line, then one record per line ("s <name> <value>",
// "a <name> <count> <values...>", "t <name> <text>"), closed by "end".
// Doubles round-trip exactly (17 significant digits). Record names and text
// values must be whitespace-free.
struct RecordFile {
  std::string kind;
  std::map<std::string, double> scalars;
  std::map<std::string, std::vector<double>> arrays;
  std::map<std::string, std::string> strings;

  double scalar(const std::string& name) const;                     // throws if absent
  const std::vector<double>& array(const std::string& name) const;  // throws if absent
  const std::string& text(const std::string& name) const;           // throws if absent
};

std::string record_file_to_string(const RecordFile& rf);
RecordFile parse_record_file(const std::string& text);

void write_record_file(const std::string& path, const RecordFile& rf);
RecordFile read_record_file(const std::string& path);

RecordFile pack_model(const predict::KnnModel& m);
RecordFile pack_model(const predict::ForestModel& m);
RecordFile pack_model(const predict::ArModel& m);
RecordFile pack_model(const slicing::QTable& q);

predict::KnnModel unpack_knn(const RecordFile& rf);
predict::ForestModel unpack_forest(const RecordFile& rf);
predict::ArModel unpack_ar(const RecordFile& rf);
slicing::QTable unpack_qtable(const RecordFile& rf);

}  // namespace fabricnet::io
