#include "co2fuse/models/model.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "co2fuse/error.hpp"

namespace co2fuse::models {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Baseline: return "baseline";
    case ModelKind::Gbt: return "gbt";
    case ModelKind::CatBoost: return "catboost";
    case ModelKind::Mlp: return "mlp";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view text) {
  for (auto k : {ModelKind::Baseline, ModelKind::Gbt, ModelKind::CatBoost, ModelKind::Mlp}) {
    if (to_string(k) == text) return k;
  }
  throw Error(ErrorKind::Usage,
              "unknown model kind '" + std::string(text) + "' (expected baseline|gbt|catboost|mlp)");
}

std::size_t default_p_features(ModelKind kind) {
  return kind == ModelKind::Baseline ? 1 : fusion::kFeatureCount;
}

double predict(const TrainedModel& model, const fusion::FeatureVector& v) {
  if (model.fingerprint != fusion::feature_fingerprint()) {
    throw Error(ErrorKind::FeatureOrder,
                "model feature order '" + model.fingerprint + "' differs from the canonical list");
  }
  return std::visit([&](const auto& m) { return m.predict(v); }, model.model);
}

std::vector<double> predict_all(const TrainedModel& model,
                                std::span<const fusion::FeatureVector> rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(predict(model, r));
  return out;
}

// --- writer ----------------------------------------------------------------

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_values(std::ostream& out, std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) out << (i ? " " : "") << num(values[i]);
}

void write_tree(std::ostream& out, const RegressionTree& tree, int id) {
  const auto& n = tree.nodes[id];
  if (n.feature < 0) {
    out << "(leaf " << num(n.value) << ')';
    return;
  }
  out << "(split " << n.feature << ' ' << num(n.threshold) << ' ' << num(n.value) << ' ';
  write_tree(out, tree, n.left);
  out << ' ';
  write_tree(out, tree, n.right);
  out << ')';
}

const char* decode_name(CatDecode d) { return d == CatDecode::Argmax ? "argmax" : "expectation"; }

void write_payload(std::ostream& out, const LinearModel& m) {
  out << "norm none\n";
  out << "slope " << num(m.slope) << "\nintercept " << num(m.intercept) << '\n';
}

void write_payload(std::ostream& out, const GbtModel& m) {
  const auto& c = m.config;
  out << "norm none\n";
  out << "config max_depth " << c.max_depth << " learning_rate " << num(c.learning_rate)
      << " n_estimators " << c.n_estimators << " gamma " << num(c.gamma) << " seed " << c.seed
      << '\n';
  out << "base_score " << num(m.base_score) << '\n';
  out << "trees " << m.trees.size() << '\n';
  for (const auto& t : m.trees) {
    write_tree(out, t, 0);
    out << '\n';
  }
}

void write_payload(std::ostream& out, const CatModel& m) {
  const auto& c = m.config;
  out << "norm none\n";
  out << "config nbr_classes " << c.nbr_classes << " max_depth " << c.max_depth
      << " learning_rate " << num(c.learning_rate) << " iterations " << c.iterations
      << " l2_leaf_reg " << num(c.l2_leaf_reg) << " border_count " << c.border_count
      << " decode " << decode_name(c.decode) << " seed " << c.seed << '\n';
  out << "bin_edges " << m.bin_edges.size() << ' ';
  write_values(out, m.bin_edges);
  out << "\nbin_centers " << m.bin_centers.size() << ' ';
  write_values(out, m.bin_centers);
  out << "\ntrees " << m.trees.size() << '\n';
  for (const auto& t : m.trees) {
    out << "(oblivious (splits";
    for (const auto& s : t.splits) out << " (" << s.feature << ' ' << num(s.border) << ')';
    out << ") (leaves " << t.leaf_values.size() << ' ';
    write_values(out, t.leaf_values);
    out << "))\n";
  }
}

void write_payload(std::ostream& out, const MlpModel& m) {
  const auto& c = m.config;
  out << "norm\nmean ";
  write_values(out, m.norm.mean);
  out << "\nstd ";
  write_values(out, m.norm.std);
  out << "\nconfig hidden " << c.hidden.size();
  for (auto h : c.hidden) out << ' ' << h;
  out << " learning_rate " << num(c.learning_rate) << " l2_lambda " << num(c.l2_lambda)
      << " epochs " << c.epochs << " batch_size " << c.batch_size << " momentum "
      << num(c.momentum) << " seed " << c.seed << '\n';
  out << "label_mean " << num(m.label_mean) << "\nlabel_std " << num(m.label_std) << '\n';
  out << "layers " << m.network.layers.size() << '\n';
  for (const auto& l : m.network.layers) {
    out << "layer " << l.inputs << ' ' << l.outputs << '\n';
    for (std::size_t o = 0; o < l.outputs; ++o) {
      write_values(out, std::span<const double>(l.weights).subspan(o * l.inputs, l.inputs));
      out << '\n';
    }
    out << "bias ";
    write_values(out, l.bias);
    out << '\n';
  }
}

}  // namespace

void save(const TrainedModel& model, std::ostream& out) {
  out << kModelMagic << " v" << model.format_version << ' ' << to_string(model.kind()) << '\n';
  out << "features " << model.fingerprint << '\n';
  std::visit([&](const auto& m) { write_payload(out, m); }, model.model);
  out << "end\n";
}

void save(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  save(model, out);
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

std::string to_text(const TrainedModel& model) {
  std::ostringstream out;
  save(model, out);
  return out.str();
}

// --- reader ----------------------------------------------------------------

namespace {

class Tokens {
 public:
  explicit Tokens(std::string_view text) {
    std::size_t i = 0;
    while (i < text.size()) {
      const char c = text[i];
      if (c == ' ' || c == '\n' || c == '\r' || c == '\t') {
        ++i;
      } else if (c == '(' || c == ')') {
        tokens_.push_back(text.substr(i, 1));
        ++i;
      } else {
        std::size_t j = i;
        while (j < text.size() && text[j] != ' ' && text[j] != '\n' && text[j] != '\r' &&
               text[j] != '\t' && text[j] != '(' && text[j] != ')')
          ++j;
        tokens_.push_back(text.substr(i, j - i));
        i = j;
      }
    }
  }

  std::string_view next() {
    if (pos_ >= tokens_.size()) fail("unexpected end of file");
    return tokens_[pos_++];
  }
  std::string_view peek() const { return pos_ < tokens_.size() ? tokens_[pos_] : ""; }

  void expect(std::string_view word) {
    const auto t = next();
    if (t != word) fail("expected '" + std::string(word) + "', found '" + std::string(t) + "'");
  }

  double real() {
    const auto t = next();
    double v = 0.0;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (r.ec != std::errc{} || r.ptr != t.data() + t.size()) {
      fail("bad number '" + std::string(t) + "'");
    }
    return v;
  }

  template <class Int>
  Int integer() {
    const auto t = next();
    Int v{};
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (r.ec != std::errc{} || r.ptr != t.data() + t.size()) {
      fail("bad integer '" + std::string(t) + "'");
    }
    return v;
  }

  double keyed_real(std::string_view key) {
    expect(key);
    return real();
  }
  template <class Int>
  Int keyed_int(std::string_view key) {
    expect(key);
    return integer<Int>();
  }

  std::size_t count(std::size_t limit) {
    const auto n = integer<std::size_t>();
    if (n > limit) fail("count " + std::to_string(n) + " exceeds limit");
    return n;
  }

  std::vector<double> reals(std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = real();
    return v;
  }

  bool at_end() const { return pos_ >= tokens_.size(); }

  [[noreturn]] static void fail(const std::string& what) {
    throw Error(ErrorKind::Format, "model file: " + what);
  }

 private:
  std::vector<std::string_view> tokens_;
  std::size_t pos_ = 0;
};

constexpr std::size_t kMaxCount = std::size_t{1} << 26;

int read_tree_node(Tokens& t, RegressionTree& tree, int depth) {
  if (depth > 64) Tokens::fail("tree too deep");
  t.expect("(");
  const auto tag = t.next();
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (tag == "leaf") {
    tree.nodes[id].value = t.real();
  } else if (tag == "split") {
    const int feature = t.integer<int>();
    if (feature < 0 || feature >= static_cast<int>(fusion::kFeatureCount)) {
      Tokens::fail("split feature out of range");
    }
    const double threshold = t.real();
    const double value = t.real();
    const int left = read_tree_node(t, tree, depth + 1);
    const int right = read_tree_node(t, tree, depth + 1);
    auto& n = tree.nodes[id];
    n.feature = feature;
    n.threshold = threshold;
    n.value = value;
    n.left = left;
    n.right = right;
  } else {
    Tokens::fail("unknown tree node '" + std::string(tag) + "'");
  }
  t.expect(")");
  return id;
}

fusion::FeatureVector read_feature_vector(Tokens& t) {
  fusion::FeatureVector v;
  for (auto& x : v) x = t.real();
  return v;
}

void expect_no_norm(Tokens& t) {
  t.expect("norm");
  t.expect("none");
}

LinearModel read_linear(Tokens& t) {
  expect_no_norm(t);
  LinearModel m;
  m.slope = t.keyed_real("slope");
  m.intercept = t.keyed_real("intercept");
  return m;
}

GbtModel read_gbt(Tokens& t) {
  expect_no_norm(t);
  GbtModel m;
  t.expect("config");
  m.config.max_depth = t.keyed_int<int>("max_depth");
  m.config.learning_rate = t.keyed_real("learning_rate");
  m.config.n_estimators = t.keyed_int<int>("n_estimators");
  m.config.gamma = t.keyed_real("gamma");
  m.config.seed = t.keyed_int<std::uint64_t>("seed");
  m.base_score = t.keyed_real("base_score");
  t.expect("trees");
  const std::size_t n = t.count(kMaxCount);
  m.trees.resize(n);
  for (auto& tree : m.trees) read_tree_node(t, tree, 0);
  return m;
}

CatModel read_catboost(Tokens& t) {
  expect_no_norm(t);
  CatModel m;
  auto& c = m.config;
  t.expect("config");
  c.nbr_classes = t.keyed_int<int>("nbr_classes");
  c.max_depth = t.keyed_int<int>("max_depth");
  c.learning_rate = t.keyed_real("learning_rate");
  c.iterations = t.keyed_int<int>("iterations");
  c.l2_leaf_reg = t.keyed_real("l2_leaf_reg");
  c.border_count = t.keyed_int<int>("border_count");
  t.expect("decode");
  const auto decode = t.next();
  if (decode == "argmax") {
    c.decode = CatDecode::Argmax;
  } else if (decode == "expectation") {
    c.decode = CatDecode::Expectation;
  } else {
    Tokens::fail("unknown decode '" + std::string(decode) + "'");
  }
  c.seed = t.keyed_int<std::uint64_t>("seed");
  if (c.nbr_classes < 2) Tokens::fail("need at least two classes");
  const auto k = static_cast<std::size_t>(c.nbr_classes);

  t.expect("bin_edges");
  if (t.count(kMaxCount) != k + 1) Tokens::fail("bin edge count mismatch");
  m.bin_edges = t.reals(k + 1);
  t.expect("bin_centers");
  if (t.count(kMaxCount) != k) Tokens::fail("bin center count mismatch");
  m.bin_centers = t.reals(k);

  t.expect("trees");
  m.trees.resize(t.count(kMaxCount));
  for (auto& tree : m.trees) {
    t.expect("(");
    t.expect("oblivious");
    t.expect("(");
    t.expect("splits");
    while (t.peek() == "(") {
      t.expect("(");
      ObliviousTree::Split s;
      s.feature = t.integer<int>();
      if (s.feature < 0 || s.feature >= static_cast<int>(fusion::kFeatureCount)) {
        Tokens::fail("split feature out of range");
      }
      s.border = t.real();
      t.expect(")");
      tree.splits.push_back(s);
      if (tree.splits.size() > 20) Tokens::fail("oblivious tree too deep");
    }
    t.expect(")");
    t.expect("(");
    t.expect("leaves");
    const std::size_t n = t.count(kMaxCount);
    if (n != (std::size_t{1} << tree.splits.size()) * k) Tokens::fail("leaf count mismatch");
    tree.leaf_values = t.reals(n);
    t.expect(")");
    t.expect(")");
  }
  return m;
}

MlpModel read_mlp(Tokens& t) {
  MlpModel m;
  t.expect("norm");
  t.expect("mean");
  m.norm.mean = read_feature_vector(t);
  t.expect("std");
  m.norm.std = read_feature_vector(t);

  auto& c = m.config;
  t.expect("config");
  t.expect("hidden");
  c.hidden.resize(t.count(64));
  for (auto& h : c.hidden) h = t.integer<std::size_t>();
  c.learning_rate = t.keyed_real("learning_rate");
  c.l2_lambda = t.keyed_real("l2_lambda");
  c.epochs = t.keyed_int<int>("epochs");
  c.batch_size = t.keyed_int<std::size_t>("batch_size");
  c.momentum = t.keyed_real("momentum");
  c.seed = t.keyed_int<std::uint64_t>("seed");
  m.label_mean = t.keyed_real("label_mean");
  m.label_std = t.keyed_real("label_std");

  t.expect("layers");
  const std::size_t layers = t.count(64);
  if (layers == 0) Tokens::fail("network has no layers");
  std::size_t fan_in = fusion::kFeatureCount;
  for (std::size_t l = 0; l < layers; ++l) {
    t.expect("layer");
    DenseLayer layer;
    layer.inputs = t.count(1 << 16);
    layer.outputs = t.count(1 << 16);
    if (layer.inputs != fan_in) Tokens::fail("layer input size mismatch");
    layer.weights = t.reals(layer.inputs * layer.outputs);
    t.expect("bias");
    layer.bias = t.reals(layer.outputs);
    fan_in = layer.outputs;
    m.network.layers.push_back(std::move(layer));
  }
  if (m.network.output_size() != 1) Tokens::fail("network must have one output");
  return m;
}

}  // namespace

TrainedModel from_text(const std::string& text) {
  const std::size_t eol = text.find('\n');
  if (eol == std::string::npos) Tokens::fail("missing header line");
  Tokens head(std::string_view(text).substr(0, eol));
  if (head.next() != kModelMagic) Tokens::fail("bad magic (not a model file)");
  const auto version_token = head.next();
  if (version_token.size() < 2 || version_token[0] != 'v') Tokens::fail("malformed version");
  int version = 0;
  const auto r = std::from_chars(version_token.data() + 1,
                                 version_token.data() + version_token.size(), version);
  if (r.ec != std::errc{} || r.ptr != version_token.data() + version_token.size()) {
    Tokens::fail("malformed version '" + std::string(version_token) + "'");
  }
  if (version != kModelFormatVersion) {
    Tokens::fail("unsupported model format version " + std::to_string(version));
  }
  const auto kind_token = head.next();
  if (!head.at_end()) Tokens::fail("trailing tokens on header line");

  ModelKind kind;
  try {
    kind = parse_model_kind(kind_token);
  } catch (const Error&) {
    Tokens::fail("unknown model kind '" + std::string(kind_token) + "'");
  }

  Tokens t(std::string_view(text).substr(eol + 1));
  TrainedModel model;
  model.format_version = version;
  t.expect("features");
  model.fingerprint = std::string(t.next());
  switch (kind) {
    case ModelKind::Baseline: model.model = read_linear(t); break;
    case ModelKind::Gbt: model.model = read_gbt(t); break;
    case ModelKind::CatBoost: model.model = read_catboost(t); break;
    case ModelKind::Mlp: model.model = read_mlp(t); break;
  }
  t.expect("end");
  if (!t.at_end()) Tokens::fail("trailing content after 'end'");
  return model;
}

TrainedModel load(std::istream& in) {
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_text(buffer.str());
}

TrainedModel load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return load(in);
}

}  // namespace co2fuse::models
