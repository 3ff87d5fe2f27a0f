// Acceptance checks: one [PASS]/[FAIL] line per criterion, nonzero exit on
// any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "../support/oracles.hpp"
#include "../support/random_nets.hpp"
#include "../support/tempdir.hpp"
#include "unrectify/builders.hpp"
#include "unrectify/error.hpp"
#include "unrectify/experiments.hpp"
#include "unrectify/forward.hpp"
#include "unrectify/kernels/kernels.hpp"
#include "unrectify/lowering.hpp"
#include "unrectify/partition.hpp"
#include "unrectify/random.hpp"
#include "unrectify/serialize.hpp"
#include "unrectify/stability.hpp"

using namespace unrectify;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1. Fusion refines its channels at every layer of the desk-scale stack.
Outcome partition_refinement() {
  const auto t0 = Clock::now();
  const auto rows = run_partition_experiment({5, 14, 5000, 7});
  const double elapsed = seconds_since(t0);
  std::map<std::size_t, std::map<std::string, PartitionCensus>> by_layer;
  for (const auto& r : rows) by_layer[r.layer][r.channel] = r.census;
  std::size_t violations = 0;
  for (auto& [layer, c] : by_layer) {
    const auto &top = c.at("top"), &bot = c.at("bottom"), &fus = c.at("fusion");
    violations += fus.region_count < std::max(top.region_count, bot.region_count);
    violations += fus.multi_point_count > std::min(top.multi_point_count, bot.multi_point_count);
    violations += fus.max_intra_dist > std::min(top.max_intra_dist, bot.max_intra_dist);
  }
  const bool ok = by_layer.size() == 5 && violations == 0 && elapsed < 60.0;
  return {ok, std::to_string(violations) + " violations over " + std::to_string(by_layer.size()) +
                  " layers, " + fmt("%.2f s", elapsed)};
}

// 2. P_a refines P_b for every b in the computable sub-graph of a.
Outcome refinement_random_dags() {
  std::uint64_t violations = 0;
  std::size_t pairs = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const DagNet net = testnet::random_dag(seed);
    const Matrix s = normal_samples(10000, net.input_dim(), seed);
    std::vector<SignaturePlan> plans;
    for (const auto& id : net.nodes()) plans.push_back(signature_plan(net, id));
    const auto keys = kernels::omp::batch_signature_keys(net, plans, s);
    for (std::size_t a = 0; a < net.node_count(); ++a) {
      const auto keep = net.ancestors(a);
      for (std::size_t b = 0; b < net.node_count(); ++b) {
        if (!keep[b]) continue;
        ++pairs;
        violations += refinement_violations(keys[a], keys[b]);
      }
    }
  }
  return {violations == 0,
          std::to_string(violations) + " violations over " + std::to_string(pairs) + " (a,b) pairs"};
}

// 3. Unscaled gains grow with depth; rescaled gains stay bounded.
Outcome stability_reproduction() {
  GainConfig cfg{5, 20, 500, 7, false, NormKind::kFrobenius};
  const auto raw = run_stability_experiment(cfg);
  cfg.scaled = true;
  const auto scaled = run_stability_experiment(cfg);
  const auto& g = raw.layer_gains;
  const auto& h = scaled.layer_gains;
  bool ok = g.size() == 5 && h.size() == 5;
  if (!ok) return {false, "missing gains"};
  for (std::size_t i = 1; i < 5; ++i) ok = ok && g[i] >= g[i - 1];
  const double ratio = g[4] / g[0];
  ok = ok && ratio > 2.0;
  double worst = 0.0;
  for (double v : h) worst = std::max(worst, v / h[0]);
  ok = ok && worst <= 1.05;
  const auto& rep = scaled.report;
  ok = ok && rep.certified && rep.m && *rep.m == 1 && rep.d == 1.0;
  return {ok, "unscaled final/first " + fmt("%.3g", ratio) + ", scaled max/first " +
                  fmt("%.3g", worst) + ", certified " + (rep.certified ? "yes" : "no") +
                  ", m = " + (rep.m ? std::to_string(*rep.m) : "none")};
}

// 4. Empirical gain never exceeds the level-recursion bound.
Outcome bound_soundness() {
  std::size_t certified = 0, checked = 0, failures = 0;
  double tightest = 0.0;
  try {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      testnet::Options opt;
      opt.weightless_links = seed % 2 == 1;
      DagNet net = testnet::random_dag(1000 + seed, opt);
      if (seed % 2 == 0) net = scale_to_stability(net, NormKind::kSpectral);
      certified += stability_certificate(net, NormKind::kSpectral).certified;
      const Matrix s = normal_samples(400, net.input_dim(), seed);
      std::vector<std::pair<Vector, Vector>> pairs;
      for (Eigen::Index i = 0; i + 1 < s.rows(); i += 2)
        pairs.emplace_back(s.row(i).transpose(), s.row(i + 1).transpose());
      // Nearby pairs probe the local slope.
      for (Eigen::Index i = 0; i < 200; ++i)
        pairs.emplace_back(s.row(i).transpose(), s.row(i).transpose() + 1e-3 * s.row(i + 200).transpose());
      const double gain = empirical_max_gain(net, pairs);
      const double bound = lipschitz_upper_bound(net, NormKind::kSpectral);
      ++checked;
      failures += gain > bound * (1 + 1e-12);
      tightest = std::max(tightest, gain / bound);
    }
  } catch (const Error& e) {
    return {false, std::string("exception: ") + e.what()};
  }
  return {failures == 0 && certified > 0 && certified < checked,
          std::to_string(failures) + " violations over " + std::to_string(checked) + " nets (" +
              std::to_string(certified) + " certified), max gain/bound " + fmt("%.3g", tightest)};
}

// 5. Lowered fragments agree with the functions they replace.
Outcome lowering_exactness() {
  Xoshiro256pp rng(5);
  double cpwl_err = 0.0;
  for (int s = 0; s < 20; ++s) {
    const CpwlSpec spec = testnet::random_cpwl(rng, 8);
    const DagNet net = lower_cpwl_to_relu(spec);
    for (int i = 0; i < 1000; ++i) {
      const double x = rng.uniform(-6, 6);
      cpwl_err = std::max(cpwl_err, std::abs(forward(net, Vector{{x}}).output(0) - cpwl_eval(spec, x)));
    }
  }
  double pool_err = 0.0;
  NormalSampler n(55);
  for (std::size_t k = 2; k <= 5; ++k) {
    const DagNet net = lower_maxpool_n(k);
    for (int i = 0; i < 10000; ++i) {
      const Vector x = n.vector(static_cast<Eigen::Index>(k));
      pool_err = std::max(pool_err, std::abs(forward(net, x).output(0) - x.maxCoeff()));
    }
  }
  return {cpwl_err <= 1e-10 && pool_err <= 1e-12,
          "cpwl max error " + fmt("%.3g", cpwl_err) + ", max-pool max error " + fmt("%.3g", pool_err)};
}

// 6. Inside a region the network equals its frozen affine map.
Outcome region_affine_exactness() {
  std::size_t accepted = 0, attempts = 0;
  double worst = 0.0;
  NormalSampler n(66);
  for (std::uint64_t seed = 1; accepted < 1000 && attempts < 100000; seed = seed % 25 + 1) {
    ++attempts;
    const DagNet net = testnet::random_dag(2000 + seed);
    const auto dim = static_cast<Eigen::Index>(net.input_dim());
    const Vector x = n.vector(dim);
    const Vector y = x + 1e-4 * n.vector(dim);
    if (signature(net, net.output(), x).key() != signature(net, net.output(), y).key()) continue;
    const AffineMap m = region_affine(net, x);
    const Vector fy = forward(net, y).output;
    worst = std::max(worst, (fy - (m.A * y + m.b)).norm() / (1 + fy.norm()));
    ++accepted;
  }
  return {accepted == 1000 && worst <= 1e-8,
          std::to_string(accepted) + " pairs, max relative residual " + fmt("%.3g", worst)};
}

// 7. Power iteration matches an independent Jacobi eigen-solver.
Outcome spectral_oracle() {
  NormalSampler n(77);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto r = static_cast<Eigen::Index>(1 + n.engine().below(50));
    const auto c = static_cast<Eigen::Index>(1 + n.engine().below(50));
    const Matrix W = n.matrix(r, c);
    const double want = oracle::sigma_max(W);
    worst = std::max(worst, std::abs(spectral_norm(W) - want) / want);
  }
  return {worst <= 1e-6, "max relative error " + fmt("%.3g", worst)};
}

Matrix grid(int steps) {
  Matrix s(steps * steps, 2);
  for (int i = 0; i < steps; ++i)
    for (int j = 0; j < steps; ++j) {
      s(i * steps + j, 0) = -2.0 + 4.0 * i / (steps - 1);
      s(i * steps + j, 1) = -2.0 + 4.0 * j / (steps - 1);
    }
  return s;
}

// 8. Grid censuses recover the MaxLU2 and ReLU partitions of the plane.
Outcome small_partitions() {
  const Matrix g = grid(401);
  const std::size_t maxlu = partition_census(build_maxlu(), "out", g).region_count;
  const std::size_t relu_id =
      partition_census(build_series(2, {{Matrix::Identity(2, 2), Vector::Zero(2), Relu{}}}), "out", g)
          .region_count;
  // Generic pre-map whose two lines cross inside the square.
  NormalSampler n(88);
  Matrix W;
  Vector b;
  for (;;) {
    W = n.matrix(2, 2);
    b = 0.5 * n.vector(2);
    const Vector cross = W.fullPivLu().solve(-b);
    if (std::abs(W.determinant()) > 0.1 && cross.cwiseAbs().maxCoeff() < 1.0) break;
  }
  const std::size_t relu_gen =
      partition_census(build_series(2, {{W, b, Relu{}}}), "out", g).region_count;
  return {maxlu == 3 && relu_id <= 4 && relu_gen == 4,
          "MaxLU2 " + std::to_string(maxlu) + ", ReLU identity " + std::to_string(relu_id) +
              ", ReLU generic " + std::to_string(relu_gen)};
}

// 9. The ResNet block cannot be rescaled; the block check matches the
// eigenvalue interval [0, 2] of a symmetric PSD product.
Outcome resnet_checks() {
  bool unscalable = false;
  try {
    scale_to_stability(build_random_resnet(4, 9), NormKind::kSpectral);
  } catch (const Error& e) {
    unscalable = e.code() == ErrorCode::kUnscalable;
  }
  NormalSampler n(99);
  std::size_t agree = 0, inside = 0;
  for (int c = 0; c < 100; ++c) {
    const Eigen::Index k = 2 + static_cast<Eigen::Index>(c % 5);
    Eigen::HouseholderQR<Matrix> qr(n.matrix(k, k));
    const Matrix Q = qr.householderQ();
    Vector lambda(k);
    for (Eigen::Index i = 0; i < k; ++i) lambda(i) = n.engine().uniform(0.0, 1.9);
    // Half the cases push one eigenvalue past 2.
    if (c % 2) lambda(0) = n.engine().uniform(2.1, 3.0);
    const Matrix B = Q * lambda.cwiseSqrt().asDiagonal();
    const Matrix P = B * B.transpose();
    const Vector eig = oracle::jacobi_eigenvalues(P);
    const bool want = eig.minCoeff() >= -1e-12 && eig.maxCoeff() <= 2.0;
    inside += want;
    agree += resnet_stability_check(B.transpose(), B) == want;
  }
  return {unscalable && agree == 100,
          std::string("block ") + (unscalable ? "Unscalable" : "scaled") + ", " +
              std::to_string(agree) + "/100 PSD cases agree (" + std::to_string(inside) + " stable)"};
}

// Every file under dir, keyed by relative path, plus captured stdout.
std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    if (e.is_regular_file())
      files[std::filesystem::relative(e.path(), dir).string()] = read_text(e.path());
  return files;
}

std::map<std::string, std::string> cli_session(const testnet::TempDir& dir) {
  const auto at = [&](const std::string& name) { return dir / name; };
  std::map<std::string, std::string> out;
  std::size_t step = 0;
  const auto call = [&](std::vector<std::string> args) {
    const auto r = testnet::run_cli(args);
    out["#" + std::to_string(step++) + " " + args[0]] = std::to_string(r.code) + "\n" + r.out + r.err;
  };
  call({"build", "series", "--layers", "3", "--dim", "4", "--seed", "3", "-o", at("series.json")});
  call({"build", "fusion", "--seed", "3", "-o", at("fusion.json")});
  call({"build", "fusion-stack", "--layers", "3", "--dim", "6", "--seed", "3", "-o", at("stack.json")});
  call({"build", "resnet", "--dim", "4", "--seed", "3", "-o", at("resnet.json")});
  call({"build", "attention", "--dim", "3", "--lambda", "2", "--seed", "3", "-o", at("att.json")});
  call({"build", "lenet", "--seed", "3", "-o", at("lenet.json")});
  call({"build", "maxlu", "-o", at("maxlu.json")});
  write_text(at("abs.json"), cpwl_to_json(CpwlSpec::abs()).dump(2) + "\n");
  call({"lower", at("abs.json"), "-o", at("abs_relu.json")});
  call({"lower", "--maxpool", "5", "-o", at("pool.json")});
  write_matrix_csv(at("x.csv"), normal_samples(20, 6, 3));
  call({"eval", at("stack.json"), at("x.csv"), "--signature", "-o", at("eval.csv")});
  call({"eval", at("stack.json"), at("x.csv"), "--signature", "--node", "L02.top"});
  call({"census", at("stack.json"), "--samples", "300", "--seed", "3", "-o", at("census.csv")});
  call({"census", at("stack.json"), "--samples", "300", "--nodes", "L01.top,L03.fusion"});
  call({"stability", at("stack.json"), "--norm", "frobenius", "--samples", "100", "--seed", "3",
        "--levels-csv", at("levels.csv"), "--gain-csv", at("gain.csv"), "--scale-to",
        at("scaled.json"), "-o", at("report.json")});
  call({"stability", at("att.json")});
  call({"experiment", "partition", "--layers", "2", "--dim", "5", "--samples", "400", "-o",
        at("partition.csv")});
  call({"experiment", "gain", "--layers", "3", "--dim", "6", "--samples", "120", "--scaled",
        "--norm", "spectral", "-o", at("gains.csv"), "--report", at("gain_report.json")});
  for (auto& [name, text] : snapshot(dir.path())) out[name] = text;
  return out;
}

// 10. Two runs of every subcommand produce identical bytes.
Outcome determinism() {
  testnet::TempDir a, b;
  auto first = cli_session(a), second = cli_session(b);
  // Captured stdout may embed the temp dir in messages; normalise it.
  const auto strip = [](std::map<std::string, std::string>& m, const std::string& root) {
    for (auto& [k, v] : m)
      for (std::size_t p; (p = v.find(root)) != std::string::npos;) v.replace(p, root.size(), "<dir>");
  };
  strip(first, a.path().string());
  strip(second, b.path().string());
  std::size_t failed_cmds = 0, differing = 0;
  for (const auto& [k, v] : first)
    if (k[0] == '#' && v.rfind("0\n", 0) != 0) ++failed_cmds;
  for (const auto& [k, v] : first) {
    auto it = second.find(k);
    differing += it == second.end() || it->second != v;
  }
  differing += second.size() != first.size();
  return {failed_cmds == 0 && differing == 0,
          std::to_string(first.size()) + " outputs compared, " + std::to_string(differing) +
              " differ, " + std::to_string(failed_cmds) + " commands failed"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 partition refinement on the fusion stack", partition_refinement},
      {"2 refinement over random DAGs", refinement_random_dags},
      {"3 gain growth and rescaled stability", stability_reproduction},
      {"4 empirical gain within the level bound", bound_soundness},
      {"5 CPWL and max-pool lowering exactness", lowering_exactness},
      {"6 region affine maps", region_affine_exactness},
      {"7 spectral norm vs eigen oracle", spectral_oracle},
      {"8 MaxLU2 and ReLU plane partitions", small_partitions},
      {"9 ResNet block checks", resnet_checks},
      {"10 CLI determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
