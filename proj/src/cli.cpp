#include "unrectify/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <ostream>

#include "unrectify/builders.hpp"
#include "unrectify/error.hpp"
#include "unrectify/experiments.hpp"
#include "unrectify/lowering.hpp"

namespace unrectify {

namespace {

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) out << text;
  else write_text(path, text);
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct BuildArgs {
  std::string kind;
  std::uint64_t seed = 7;
  std::size_t layers = 5;
  std::size_t dim = 0;
  double lambda = 1.0;
  std::size_t seq_len = 4;
  std::string output;
};

DagNet build_kind(const BuildArgs& a) {
  auto dim = [&](std::size_t fallback) { return a.dim ? a.dim : fallback; };
  if (a.kind == "series") return build_random_series(a.layers, dim(14), a.seed);
  if (a.kind == "fusion") return build_concurrent_pair();
  if (a.kind == "fusion-stack") return build_fusion_stack(a.layers, dim(14), a.seed);
  if (a.kind == "resnet") return build_random_resnet(dim(14), a.seed);
  if (a.kind == "attention") return build_random_attention(dim(4), a.seed, a.lambda, a.seq_len);
  if (a.kind == "lenet") return build_lenet_shape(a.seed);
  if (a.kind == "maxlu") {
    const std::size_t d = dim(2);
    if (d % 2 != 0) throw Error(ErrorCode::kInvalidArgument, "maxlu needs an even --dim");
    return build_maxlu(d / 2);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown build kind '" + a.kind + "'");
}

struct LowerArgs {
  std::string spec;
  std::size_t maxpool = 0;
  std::string output;
};

DagNet lower(const LowerArgs& a) {
  if (a.maxpool > 0) return lower_maxpool_n(a.maxpool);
  if (a.spec.empty()) throw Error(ErrorCode::kInvalidArgument, "lower needs a spec file or --maxpool");
  Json j;
  try {
    j = Json::parse(read_text(a.spec));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kParseError, a.spec + ": " + e.what());
  }
  return lower_cpwl_to_relu(cpwl_from_json(j, a.spec));
}

struct EvalArgs {
  std::string graph, input, node, output;
  bool signature = false;
};

std::string eval(const EvalArgs& a) {
  const DagNet net = load_graph(a.graph);
  const Matrix x = read_matrix_csv(a.input);
  std::optional<SignaturePlan> plan;
  if (a.signature || !a.node.empty())
    plan = signature_plan(net, a.node.empty() ? net.output() : a.node);
  std::string csv;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Trace t = forward(net, x.row(i).transpose());
    for (Eigen::Index k = 0; k < t.output.size(); ++k) {
      if (k) csv += ',';
      csv += format_report(t.output(k));
    }
    if (plan) csv += "," + hex64(hash_key(signature_key(*plan, t)));
    csv += '\n';
  }
  return csv;
}

struct CensusArgs {
  std::string graph, output;
  std::size_t samples = 5000;
  std::uint64_t seed = 7;
  std::vector<std::string> nodes;
};

std::string census(const CensusArgs& a) {
  const DagNet net = load_graph(a.graph);
  std::vector<NodeId> nodes = a.nodes;
  if (nodes.empty()) nodes.assign(net.nodes().begin() + 1, net.nodes().end());
  return partition_csv(run_census(net, nodes, normal_samples(a.samples, net.input_dim(), a.seed)));
}

struct StabilityArgs {
  std::string graph, norm = "spectral", output, levels_csv, gain_csv, scale_to;
  std::size_t samples = 0;
  std::uint64_t seed = 7;
};

std::string stability(const StabilityArgs& a) {
  DagNet net = load_graph(a.graph);
  const NormKind norm = parse_norm(a.norm);
  if (!a.scale_to.empty()) {
    net = scale_to_stability(net, norm);
    save_graph(net, a.scale_to);
  }
  StabilityReport report = stability_certificate(net, norm);
  const PairSelection pairs = select_pairs(a.samples, a.seed);
  if (pairs.count > 0) {
    std::vector<std::size_t> levels;
    for (std::size_t n = 1; n <= net.levels().L; ++n) levels.push_back(n);
    const auto gains = empirical_level_gains(
        net, normal_samples(a.samples, net.input_dim(), a.seed), levels, pairs);
    report.empirical_gain = gains.empty() ? 0.0 : gains.back();
    report.pair_count = pairs.count;
    report.pairs_subsampled = !pairs.all;
    if (!a.gain_csv.empty()) write_text(a.gain_csv, gain_csv(gains));
  }
  if (!a.levels_csv.empty()) write_text(a.levels_csv, level_sums_csv(net));
  return report_to_json(report).dump(2) + "\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Un-rectifying analysis of DAG-structured networks", "unrectify"};
  app.require_subcommand(1);

  BuildArgs build_args;
  auto* build = app.add_subcommand("build", "Construct a network and write its graph file");
  build->add_option("kind", build_args.kind, "Network kind")
      ->required()
      ->check(CLI::IsMember(
          {"series", "fusion", "fusion-stack", "resnet", "attention", "lenet", "maxlu"}));
  build->add_option("--seed", build_args.seed, "Weight seed");
  build->add_option("--layers", build_args.layers, "Layer count (series, fusion-stack)");
  build->add_option("--dim", build_args.dim, "Width (kind-specific default)");
  build->add_option("--lambda", build_args.lambda, "Softmax scale (attention)");
  build->add_option("--seq-len", build_args.seq_len, "Token count (attention)");
  build->add_option("-o,--output", build_args.output, "Graph JSON path")->required();

  LowerArgs lower_args;
  auto* lower_cmd = app.add_subcommand("lower", "Lower a CPWL spec or a max-pool to ReLU arcs");
  lower_cmd->add_option("spec", lower_args.spec, "CPWL spec JSON");
  lower_cmd->add_option("--maxpool", lower_args.maxpool, "Lower a max over this block size");
  lower_cmd->add_option("-o,--output", lower_args.output, "Graph JSON path")->required();

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a graph on CSV inputs");
  eval_cmd->add_option("graph", eval_args.graph, "Graph JSON")->required();
  eval_cmd->add_option("input", eval_args.input, "Input CSV, one sample per row")->required();
  eval_cmd->add_flag("--signature", eval_args.signature, "Append the region signature hash");
  eval_cmd->add_option("--node", eval_args.node, "Signature node (default: output)");
  eval_cmd->add_option("-o,--output", eval_args.output, "Output CSV");

  CensusArgs census_args;
  auto* census_cmd = app.add_subcommand("census", "Region census at graph nodes");
  census_cmd->add_option("graph", census_args.graph, "Graph JSON")->required();
  census_cmd->add_option("--samples", census_args.samples, "Standard-normal samples");
  census_cmd->add_option("--seed", census_args.seed, "Sample seed");
  census_cmd->add_option("--nodes", census_args.nodes, "Nodes (default: all but the input)")
      ->delimiter(',');
  census_cmd->add_option("-o,--output", census_args.output, "Output CSV");

  StabilityArgs stab_args;
  auto* stab_cmd = app.add_subcommand("stability", "Level sums, certificate and gains");
  stab_cmd->add_option("graph", stab_args.graph, "Graph JSON")->required();
  stab_cmd->add_option("--norm", stab_args.norm, "spectral | frobenius")
      ->check(CLI::IsMember({"spectral", "frobenius"}));
  stab_cmd->add_option("--samples", stab_args.samples, "Samples for empirical gains");
  stab_cmd->add_option("--seed", stab_args.seed, "Sample seed");
  stab_cmd->add_option("--levels-csv", stab_args.levels_csv, "Write level,sum_spectral,sum_frobenius");
  stab_cmd->add_option("--gain-csv", stab_args.gain_csv, "Write layer,max_gain");
  stab_cmd->add_option("--scale-to", stab_args.scale_to, "Rescale and write the graph here first");
  stab_cmd->add_option("-o,--output", stab_args.output, "Report JSON");

  auto* exp_cmd = app.add_subcommand("experiment", "Fusion-stack experiments");
  exp_cmd->require_subcommand(1);

  PartitionConfig part_cfg;
  std::string part_out;
  auto* part_cmd = exp_cmd->add_subcommand("partition", "Partition refinement census");
  part_cmd->add_option("--layers", part_cfg.layers, "Fusion layers");
  part_cmd->add_option("--dim", part_cfg.dim, "Width");
  part_cmd->add_option("--samples", part_cfg.samples, "Standard-normal samples");
  part_cmd->add_option("--seed", part_cfg.seed, "Seed");
  part_cmd->add_option("-o,--output", part_out, "Output CSV");

  GainConfig gain_cfg;
  std::string gain_out, gain_report, gain_norm = "frobenius";
  auto* gain_cmd = exp_cmd->add_subcommand("gain", "Per-layer empirical max gain");
  gain_cmd->add_option("--layers", gain_cfg.layers, "Fusion layers");
  gain_cmd->add_option("--dim", gain_cfg.dim, "Width");
  gain_cmd->add_option("--samples", gain_cfg.samples, "Standard-normal samples");
  gain_cmd->add_option("--seed", gain_cfg.seed, "Seed");
  gain_cmd->add_flag("--scaled", gain_cfg.scaled, "Rescale weights to meet the level condition");
  gain_cmd->add_option("--norm", gain_norm, "Norm used for rescaling and the report")
      ->check(CLI::IsMember({"spectral", "frobenius"}));
  gain_cmd->add_option("-o,--output", gain_out, "Output CSV");
  gain_cmd->add_option("--report", gain_report, "Report JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (build->parsed()) {
      save_graph(build_kind(build_args), build_args.output);
    } else if (lower_cmd->parsed()) {
      save_graph(lower(lower_args), lower_args.output);
    } else if (eval_cmd->parsed()) {
      emit(eval_args.output, eval(eval_args), out);
    } else if (census_cmd->parsed()) {
      emit(census_args.output, census(census_args), out);
    } else if (stab_cmd->parsed()) {
      emit(stab_args.output, stability(stab_args), out);
    } else if (part_cmd->parsed()) {
      emit(part_out, partition_csv(run_partition_experiment(part_cfg)), out);
    } else if (gain_cmd->parsed()) {
      gain_cfg.norm = parse_norm(gain_norm);
      const GainResult r = run_stability_experiment(gain_cfg);
      emit(gain_out, gain_csv(r.layer_gains), out);
      if (!gain_report.empty()) write_text(gain_report, report_to_json(r.report).dump(2) + "\n");
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace unrectify
