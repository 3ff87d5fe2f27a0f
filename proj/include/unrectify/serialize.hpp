#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "unrectify/dag.hpp"

// Graph file format (UTF-8 JSON):
//
//   {
//     "format": "unrectify-dag/1",
//     "input": {"id": "in", "dim": 14},
//     "nodes": ["in", ...],                      // topological order
//     "arcs": [
//       {"id": 0, "from": "in", "to": "h", "port": 0,
//        "op": {"kind": "activation_affine",
//               "activation": {"type": "relu"},
//               "W": "graph.weights/a0.W.csv", "b": "graph.weights/a0.b.csv"}},
//       ...
//     ]
//   }
//
// op.kind is one of identity, linear, affine, activation, activation_affine,
// transform, transform_affine. Weightless kinds carry "dim". Weight paths are
// relative to the JSON file; matrices are row-major CSV (one row per line),
// bias vectors one entry per line.

namespace unrectify {

using Json = nlohmann::ordered_json;

Json activation_to_json(const Activation& act);
/// {"type":"relu"}, {"type":"maxlu2"}, {"type":"cpwl","r":[..],"a":[..],
/// "l":[..],"t":[..]}, {"type":"cpwl_diag","specs":[<cpwl>...]}.
Activation activation_from_json(const Json& j, const std::string& context = "activation");

Json cpwl_to_json(const CpwlSpec& spec);
CpwlSpec cpwl_from_json(const Json& j, const std::string& context = "cpwl");

Json transform_to_json(const Transform& t);
/// {"type":"softmax","lambda":x}, sigmoid, tanh,
/// {"type":"inner_products"|"mix_values","seq_len":T,"head_dim":h}.
Transform transform_from_json(const Json& j, const std::string& context = "transform");

void save_graph(const DagNet& net, const std::filesystem::path& path);
/// Throws ParseError (with file/field context), MissingWeights, IoError,
/// InvalidGraph.
DagNet load_graph(const std::filesystem::path& path);

/// Shortest decimal that parses back to the same double.
std::string format_shortest(double v);
/// printf %.12g, the CSV report format.
std::string format_report(double v);

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
void write_vector_csv(const std::filesystem::path& path, const Vector& v);
/// Row-major numeric CSV; blank lines are skipped. Throws IoError,
/// ParseError.
Matrix read_matrix_csv(const std::filesystem::path& path);
Vector read_vector_csv(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace unrectify
