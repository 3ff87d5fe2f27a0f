#include "unrectify/serialize.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "unrectify/error.hpp"

namespace unrectify {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void parse_fail(const std::string& ctx, const std::string& what) {
  throw Error(ErrorCode::kParseError, ctx + ": " + what);
}

const Json& field(const Json& j, const char* key, const std::string& ctx) {
  if (!j.is_object()) parse_fail(ctx, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) parse_fail(ctx, std::string("missing field '") + key + "'");
  return *it;
}

std::string get_string(const Json& j, const char* key, const std::string& ctx) {
  const Json& v = field(j, key, ctx);
  if (!v.is_string()) parse_fail(ctx + "." + key, "expected a string");
  return v.get<std::string>();
}

std::size_t get_size(const Json& j, const char* key, const std::string& ctx) {
  const Json& v = field(j, key, ctx);
  if (!v.is_number_unsigned()) parse_fail(ctx + "." + key, "expected a non-negative integer");
  return v.get<std::size_t>();
}

double get_double(const Json& j, const char* key, const std::string& ctx) {
  const Json& v = field(j, key, ctx);
  if (!v.is_number()) parse_fail(ctx + "." + key, "expected a number");
  return v.get<double>();
}

std::vector<double> get_doubles(const Json& j, const char* key, const std::string& ctx) {
  const Json& v = field(j, key, ctx);
  if (!v.is_array()) parse_fail(ctx + "." + key, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number())
      parse_fail(ctx + "." + key + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

std::vector<RampTerm> zip_terms(const std::vector<double>& slopes,
                                const std::vector<double>& points, const std::string& ctx) {
  if (slopes.size() != points.size())
    parse_fail(ctx, "slope and breakpoint arrays differ in length");
  std::vector<RampTerm> terms;
  for (std::size_t i = 0; i < slopes.size(); ++i) terms.push_back({slopes[i], points[i]});
  return terms;
}

}  // namespace

// ---------------------------------------------------------------------------
// Activation / transform JSON

Json cpwl_to_json(const CpwlSpec& spec) {
  Json j;
  j["type"] = "cpwl";
  Json r = Json::array(), a = Json::array(), l = Json::array(), t = Json::array();
  for (const auto& term : spec.right) {
    r.push_back(term.slope);
    a.push_back(term.breakpoint);
  }
  for (const auto& term : spec.left) {
    l.push_back(term.slope);
    t.push_back(term.breakpoint);
  }
  j["r"] = r;
  j["a"] = a;
  j["l"] = l;
  j["t"] = t;
  return j;
}

CpwlSpec cpwl_from_json(const Json& j, const std::string& ctx) {
  if (get_string(j, "type", ctx) != "cpwl") parse_fail(ctx + ".type", "expected \"cpwl\"");
  CpwlSpec spec;
  spec.right = zip_terms(get_doubles(j, "r", ctx), get_doubles(j, "a", ctx), ctx);
  spec.left = zip_terms(get_doubles(j, "l", ctx), get_doubles(j, "t", ctx), ctx);
  try {
    spec.check();
  } catch (const Error& e) {
    parse_fail(ctx, e.what());
  }
  return spec;
}

Json activation_to_json(const Activation& act) {
  if (std::holds_alternative<Relu>(act)) return Json{{"type", "relu"}};
  if (std::holds_alternative<MaxLu2>(act)) return Json{{"type", "maxlu2"}};
  if (const auto* c = std::get_if<Cpwl>(&act)) return cpwl_to_json(c->spec);
  const auto& d = std::get<CpwlDiag>(act);
  Json specs = Json::array();
  for (const auto& s : d.specs) specs.push_back(cpwl_to_json(s));
  Json j;
  j["type"] = "cpwl_diag";
  j["specs"] = specs;
  return j;
}

Activation activation_from_json(const Json& j, const std::string& ctx) {
  const std::string type = get_string(j, "type", ctx);
  if (type == "relu") return Relu{};
  if (type == "maxlu2") return MaxLu2{};
  if (type == "cpwl") return Cpwl{cpwl_from_json(j, ctx)};
  if (type == "cpwl_diag") {
    const Json& specs = field(j, "specs", ctx);
    if (!specs.is_array()) parse_fail(ctx + ".specs", "expected an array");
    CpwlDiag d;
    for (std::size_t i = 0; i < specs.size(); ++i)
      d.specs.push_back(cpwl_from_json(specs[i], ctx + ".specs[" + std::to_string(i) + "]"));
    return d;
  }
  parse_fail(ctx + ".type", "unknown activation '" + type + "'");
}

Json transform_to_json(const Transform& t) {
  if (const auto* s = std::get_if<Softmax>(&t)) {
    Json j;
    j["type"] = "softmax";
    j["lambda"] = s->lambda;
    return j;
  }
  if (std::holds_alternative<Sigmoid>(t)) return Json{{"type", "sigmoid"}};
  if (std::holds_alternative<Tanh>(t)) return Json{{"type", "tanh"}};
  Json j;
  if (const auto* ip = std::get_if<InnerProducts>(&t)) {
    j["type"] = "inner_products";
    j["seq_len"] = ip->seq_len;
    j["head_dim"] = ip->head_dim;
  } else {
    const auto& mv = std::get<MixValues>(t);
    j["type"] = "mix_values";
    j["seq_len"] = mv.seq_len;
    j["head_dim"] = mv.head_dim;
  }
  return j;
}

Transform transform_from_json(const Json& j, const std::string& ctx) {
  const std::string type = get_string(j, "type", ctx);
  if (type == "softmax") return Softmax{get_double(j, "lambda", ctx)};
  if (type == "sigmoid") return Sigmoid{};
  if (type == "tanh") return Tanh{};
  if (type == "inner_products")
    return InnerProducts{get_size(j, "seq_len", ctx), get_size(j, "head_dim", ctx)};
  if (type == "mix_values")
    return MixValues{get_size(j, "seq_len", ctx), get_size(j, "head_dim", ctx)};
  parse_fail(ctx + ".type", "unknown transform '" + type + "'");
}

// ---------------------------------------------------------------------------
// Text and CSV

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

std::string format_shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string format_report(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_matrix_csv(const fs::path& path, const Matrix& m) {
  std::string text;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) text += ',';
      text += format_shortest(m(i, j));
    }
    text += '\n';
  }
  write_text(path, text);
}

void write_vector_csv(const fs::path& path, const Vector& v) {
  write_matrix_csv(path, Matrix(v));
}

Matrix read_matrix_csv(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::kIoError, "no such file " + path.string());
  const std::string text = read_text(path);
  std::vector<double> values;
  std::size_t rows = 0, cols = 0, line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      std::string_view cell = line.substr(start, comma == std::string_view::npos
                                                     ? std::string_view::npos
                                                     : comma - start);
      while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
      while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.remove_suffix(1);
      if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
      double v = 0.0;
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || p != cell.data() + cell.size() || cell.empty())
        throw Error(ErrorCode::kParseError, path.string() + ":" + std::to_string(line_no) +
                                                ": bad number '" + std::string(cell) + "'");
      values.push_back(v);
      ++count;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (rows == 0) cols = count;
    if (count != cols)
      throw Error(ErrorCode::kParseError, path.string() + ":" + std::to_string(line_no) +
                                              ": expected " + std::to_string(cols) +
                                              " fields, got " + std::to_string(count));
    ++rows;
  }
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * cols + j];
  return m;
}

Vector read_vector_csv(const fs::path& path) {
  const Matrix m = read_matrix_csv(path);
  if (m.cols() > 1 && m.rows() > 1)
    throw Error(ErrorCode::kParseError, path.string() + ": expected a single column or row");
  return Eigen::Map<const Vector>(m.data(), m.size());
}

// ---------------------------------------------------------------------------
// Graph files

void save_graph(const DagNet& net, const fs::path& path) {
  const fs::path dir = path.parent_path();
  const std::string wdir = path.stem().string() + ".weights";
  std::error_code ec;
  fs::create_directories((dir.empty() ? fs::path(".") : dir) / wdir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + wdir + ": " + ec.message());

  Json j;
  j["format"] = "unrectify-dag/1";
  j["input"] = Json{{"id", net.input()}, {"dim", net.input_dim()}};
  j["nodes"] = net.nodes();
  Json arcs = Json::array();
  for (const auto& arc : net.arcs()) {
    const ArcOp& op = arc.op;
    Json o;
    o["kind"] = to_string(op.kind());
    if (op.is_activation()) o["activation"] = activation_to_json(op.activation());
    if (op.is_transform()) o["transform"] = transform_to_json(op.transform());
    const std::string base = wdir + "/a" + std::to_string(arc.id);
    if (op.has_weight()) {
      o["W"] = base + ".W.csv";
      write_matrix_csv(dir / (base + ".W.csv"), op.weight());
    } else {
      o["dim"] = op.in_dim();
    }
    if (op.has_bias()) {
      o["b"] = base + ".b.csv";
      write_vector_csv(dir / (base + ".b.csv"), op.bias());
    }
    Json a;
    a["id"] = arc.id;
    a["from"] = arc.from;
    a["to"] = arc.to;
    a["port"] = arc.port;
    a["op"] = o;
    arcs.push_back(a);
  }
  j["arcs"] = arcs;
  write_text(path, j.dump(2) + "\n");
}

namespace {

ArcOp op_from_json(const Json& o, const fs::path& dir, const std::string& ctx) {
  const std::string kind = get_string(o, "kind", ctx);
  auto weights = [&](const char* key) {
    const fs::path p = dir / get_string(o, key, ctx);
    if (!fs::exists(p))
      throw Error(ErrorCode::kMissingWeights, ctx + "." + key + ": " + p.string() + " not found");
    return read_matrix_csv(p);
  };
  auto bias = [&]() -> Vector {
    const Matrix m = weights("b");
    return Eigen::Map<const Vector>(m.data(), m.size());
  };
  try {
    if (kind == "identity") return ArcOp::identity(get_size(o, "dim", ctx));
    if (kind == "linear") return ArcOp::linear(weights("W"));
    if (kind == "affine") return ArcOp::affine(weights("W"), bias());
    if (kind == "activation")
      return ArcOp::activation(activation_from_json(field(o, "activation", ctx), ctx + ".activation"),
                               get_size(o, "dim", ctx));
    if (kind == "activation_affine")
      return ArcOp::activation_affine(
          activation_from_json(field(o, "activation", ctx), ctx + ".activation"), weights("W"),
          bias());
    if (kind == "transform")
      return ArcOp::transform(transform_from_json(field(o, "transform", ctx), ctx + ".transform"),
                              get_size(o, "dim", ctx));
    if (kind == "transform_affine")
      return ArcOp::transform_affine(
          transform_from_json(field(o, "transform", ctx), ctx + ".transform"), weights("W"),
          bias());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParseError || e.code() == ErrorCode::kMissingWeights ||
        e.code() == ErrorCode::kIoError)
      throw;
    parse_fail(ctx, e.what());
  }
  parse_fail(ctx + ".kind", "unknown op kind '" + kind + "'");
}

}  // namespace

DagNet load_graph(const fs::path& path) {
  const std::string text = read_text(path);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
  const std::string ctx = path.filename().string();
  if (get_string(j, "format", ctx) != "unrectify-dag/1")
    parse_fail(ctx + ".format", "unsupported format");
  DagDraft draft;
  const Json& input = field(j, "input", ctx);
  draft.input = get_string(input, "id", ctx + ".input");
  draft.input_dim = get_size(input, "dim", ctx + ".input");
  const Json& nodes = field(j, "nodes", ctx);
  if (!nodes.is_array()) parse_fail(ctx + ".nodes", "expected an array");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!nodes[i].is_string())
      parse_fail(ctx + ".nodes[" + std::to_string(i) + "]", "expected a string");
    draft.nodes.push_back(nodes[i].get<std::string>());
  }
  const Json& arcs = field(j, "arcs", ctx);
  if (!arcs.is_array()) parse_fail(ctx + ".arcs", "expected an array");
  const fs::path dir = path.parent_path();
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    const std::string actx = ctx + ".arcs[" + std::to_string(i) + "]";
    const Json& a = arcs[i];
    draft.arcs.push_back(Arc{get_size(a, "id", actx), get_string(a, "from", actx),
                             get_string(a, "to", actx), get_size(a, "port", actx),
                             op_from_json(field(a, "op", actx), dir, actx + ".op")});
  }
  return DagNet::freeze(std::move(draft));
}

}  // namespace unrectify
