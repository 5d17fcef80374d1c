#include "fabricnet/model_io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fabricnet::io {
namespace {

constexpr const char* kMagic = "fabricnet-model v1";

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_token(std::istringstream& in, std::string& out, const char* what) {
  if (!(in >> out)) throw std::runtime_error(std::string("record file: missing ") + what);
}

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error("record file: " + msg); }

}  // namespace

double RecordFile::scalar(const std::string& name) const {
  const auto it = scalars.find(name);
  if (it == scalars.end()) fail("missing scalar '" + name + "'");
  return it->second;
}

const std::vector<double>& RecordFile::array(const std::string& name) const {
  const auto it = arrays.find(name);
  if (it == arrays.end()) fail("missing array '" + name + "'");
  return it->second;
}

const std::string& RecordFile::text(const std::string& name) const {
  const auto it = strings.find(name);
  if (it == strings.end()) fail("missing text '" + name + "'");
  return it->second;
}

std::string record_file_to_string(const RecordFile& rf) {
  std::ostringstream out;
  out << kMagic << "\n";
  out << "kind " << rf.kind << "\n";
  for (const auto& [name, v] : rf.scalars) out << "s " << name << " " << fmt_double(v) << "\n";
  for (const auto& [name, vs] : rf.arrays) {
    out << "a " << name << " " << vs.size();
    for (double v : vs) out << " " << fmt_double(v);
    out << "\n";
  }
  for (const auto& [name, t] : rf.strings) out << "t " << name << " " << t << "\n";
  out << "end\n";
  return out.str();
}

RecordFile parse_record_file(const std::string& text) {
  std::istringstream lines(text);
  std::string line;
  if (!std::getline(lines, line) || line != kMagic) fail("bad magic line");

  RecordFile rf;
  bool closed = false;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    if (line == "end") {
      closed = true;
      break;
    }
    std::istringstream in(line);
    std::string tag, name;
    require_token(in, tag, "record tag");
    if (tag == "kind") {
      require_token(in, rf.kind, "kind value");
    } else if (tag == "s") {
      require_token(in, name, "scalar name");
      double v;
      if (!(in >> v)) fail("bad scalar value for '" + name + "'");
      rf.scalars[name] = v;
    } else if (tag == "a") {
      require_token(in, name, "array name");
      std::size_t n;
      if (!(in >> n)) fail("bad array count for '" + name + "'");
      std::vector<double> vs(n);
      for (std::size_t i = 0; i < n; ++i)
        if (!(in >> vs[i])) fail("short array '" + name + "'");
      rf.arrays[name] = std::move(vs);
    } else if (tag == "t") {
      require_token(in, name, "text name");
      std::string v;
      require_token(in, v, "text value");
      rf.strings[name] = v;
    } else {
      fail("unknown record tag '" + tag + "'");
    }
  }
  if (!closed) fail("missing end line");
  if (rf.kind.empty()) fail("missing kind record");
  return rf;
}

void write_record_file(const std::string& path, const RecordFile& rf) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail("cannot open '" + path + "' for writing");
  f << record_file_to_string(rf);
}

RecordFile read_record_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_record_file(buf.str());
}

RecordFile pack_model(const predict::KnnModel& m) {
  RecordFile rf;
  rf.kind = "knn";
  rf.scalars["k"] = m.k;
  rf.scalars["phase_count"] = m.phase_count;
  rf.scalars["margin_z"] = m.margin_z;
  rf.scalars["scale.x"] = m.scales.x;
  rf.scalars["scale.y"] = m.scales.y;
  rf.scalars["scale.phase"] = m.scales.phase;
  std::vector<double> xs, ys, phases, labels;
  for (const predict::TrainingPoint& p : m.train) {
    xs.push_back(p.x);
    ys.push_back(p.y);
    phases.push_back(p.phase);
    labels.push_back(p.label_bps);
  }
  rf.arrays["train.x"] = std::move(xs);
  rf.arrays["train.y"] = std::move(ys);
  rf.arrays["train.phase"] = std::move(phases);
  rf.arrays["train.label"] = std::move(labels);
  return rf;
}

predict::KnnModel unpack_knn(const RecordFile& rf) {
  if (rf.kind != "knn") fail("kind '" + rf.kind + "' is not knn");
  predict::KnnModel m;
  m.k = static_cast<int>(rf.scalar("k"));
  m.phase_count = static_cast<int>(rf.scalar("phase_count"));
  m.margin_z = rf.scalar("margin_z");
  m.scales = {rf.scalar("scale.x"), rf.scalar("scale.y"), rf.scalar("scale.phase")};
  const auto& xs = rf.array("train.x");
  const auto& ys = rf.array("train.y");
  const auto& phases = rf.array("train.phase");
  const auto& labels = rf.array("train.label");
  if (ys.size() != xs.size() || phases.size() != xs.size() || labels.size() != xs.size())
    fail("knn train arrays disagree in length");
  m.train.resize(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    m.train[i] = {xs[i], ys[i], static_cast<int>(phases[i]), labels[i]};
  return m;
}

RecordFile pack_model(const predict::ForestModel& m) {
  RecordFile rf;
  rf.kind = "forest";
  rf.scalars["margin_z"] = m.margin_z;
  rf.scalars["degenerate"] = m.degenerate ? 1.0 : 0.0;
  rf.scalars["global_mean"] = m.global_mean;
  rf.scalars["trees"] = static_cast<double>(m.trees.size());
  for (std::size_t t = 0; t < m.trees.size(); ++t) {
    const std::string prefix = "tree" + std::to_string(t) + ".";
    std::vector<double> feature, threshold, left, right, value;
    for (const predict::TreeNode& n : m.trees[t].nodes) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      value.push_back(n.value);
    }
    rf.arrays[prefix + "feature"] = std::move(feature);
    rf.arrays[prefix + "threshold"] = std::move(threshold);
    rf.arrays[prefix + "left"] = std::move(left);
    rf.arrays[prefix + "right"] = std::move(right);
    rf.arrays[prefix + "value"] = std::move(value);
  }
  return rf;
}

predict::ForestModel unpack_forest(const RecordFile& rf) {
  if (rf.kind != "forest") fail("kind '" + rf.kind + "' is not forest");
  predict::ForestModel m;
  m.margin_z = rf.scalar("margin_z");
  m.degenerate = rf.scalar("degenerate") != 0.0;
  m.global_mean = rf.scalar("global_mean");
  const auto n_trees = static_cast<std::size_t>(rf.scalar("trees"));
  m.trees.resize(n_trees);
  for (std::size_t t = 0; t < n_trees; ++t) {
    const std::string prefix = "tree" + std::to_string(t) + ".";
    const auto& feature = rf.array(prefix + "feature");
    const auto& threshold = rf.array(prefix + "threshold");
    const auto& left = rf.array(prefix + "left");
    const auto& right = rf.array(prefix + "right");
    const auto& value = rf.array(prefix + "value");
    if (threshold.size() != feature.size() || left.size() != feature.size() ||
        right.size() != feature.size() || value.size() != feature.size())
      fail("forest tree arrays disagree in length");
    m.trees[t].nodes.resize(feature.size());
    for (std::size_t i = 0; i < feature.size(); ++i)
      m.trees[t].nodes[i] = {static_cast<int>(feature[i]), threshold[i],
                             static_cast<int>(left[i]), static_cast<int>(right[i]), value[i]};
  }
  return m;
}

RecordFile pack_model(const predict::ArModel& m) {
  RecordFile rf;
  rf.kind = "ar";
  rf.scalars["order"] = m.order;
  rf.scalars["intercept"] = m.intercept;
  rf.scalars["residual_std"] = m.residual_std;
  rf.arrays["coeffs"] = m.coeffs;
  return rf;
}

predict::ArModel unpack_ar(const RecordFile& rf) {
  if (rf.kind != "ar") fail("kind '" + rf.kind + "' is not ar");
  predict::ArModel m;
  m.order = static_cast<int>(rf.scalar("order"));
  m.intercept = rf.scalar("intercept");
  m.residual_std = rf.scalar("residual_std");
  m.coeffs = rf.array("coeffs");
  return m;
}

RecordFile pack_model(const slicing::QTable& q) {
  RecordFile rf;
  rf.kind = "qtable";
  rf.scalars["n_actions"] = q.n_actions;
  rf.scalars["max_keys"] = static_cast<double>(q.max_keys);
  rf.strings["signature"] = q.signature;
  for (const auto& [key, row] : q.values) rf.arrays["q." + key] = row;
  for (const auto& [key, row] : q.visits)
    rf.arrays["v." + key] = std::vector<double>(row.begin(), row.end());
  return rf;
}

slicing::QTable unpack_qtable(const RecordFile& rf) {
  if (rf.kind != "qtable") fail("kind '" + rf.kind + "' is not qtable");
  slicing::QTable q;
  q.n_actions = static_cast<int>(rf.scalar("n_actions"));
  q.max_keys = static_cast<std::size_t>(rf.scalar("max_keys"));
  q.signature = rf.text("signature");
  for (const auto& [name, vs] : rf.arrays) {
    if (name.rfind("q.", 0) == 0) {
      q.values[name.substr(2)] = vs;
    } else if (name.rfind("v.", 0) == 0) {
      q.visits[name.substr(2)] = std::vector<int>(vs.begin(), vs.end());
    } else {
      fail("unexpected qtable array '" + name + "'");
    }
  }
  return q;
}

}  // namespace fabricnet::io
