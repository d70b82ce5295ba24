// Command-line front end: infer, oracle, bench, generate.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "ibia/driver.hpp"
#include "ibia/error.hpp"
#include "ibia/model.hpp"
#include "ibia/random_model.hpp"
#include "ibia/report.hpp"

namespace fs = std::filesystem;
using namespace ibia;

namespace {

enum ExitCode {
  kOk = 0,
  kFailure = 1,
  kParse = 2,
  kInfeasible = 3,
  kInternal = 4,
  kCap = 5,
};

std::string fmt_log10(double x) {
  if (std::isinf(x)) return x < 0 ? "-inf" : "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

double parse_log10(const std::string& s) {
  if (s == "-inf") return kLogZero;
  return std::stod(s);
}

struct EstimateFlags {
  EstimateOptions opt;
  double mcs_im = -1.0;
  std::string heuristic = "maxmi";
  std::string eviction = "largest";
  std::string grouping = "transitive";

  void add(CLI::App* cmd) {
    cmd->add_option("--mcs-p", opt.mcs_p, "Clique size bound for building (log2 states)")
        ->capture_default_str();
    cmd->add_option("--mcs-im", mcs_im, "Clique size bound after approximation (default mcs-p - 5)");
    cmd->add_option("--approx-heuristic", heuristic, "Variable choice for local marginalization")
        ->check(CLI::IsMember({"maxmi", "random"}))
        ->capture_default_str();
    cmd->add_option("--seed", opt.seed, "Seed for the random heuristic")->capture_default_str();
    cmd->add_flag("--escalate-mcs", opt.escalate_mcs,
                  "Raise mcs-p by one when a build step cannot add any factor");
    cmd->add_option("--eviction", eviction, "How a group that does not fit is shrunk")
        ->check(CLI::IsMember({"largest", "group"}))
        ->capture_default_str();
    cmd->add_option("--grouping", grouping, "How pending factors are batched")
        ->check(CLI::IsMember({"transitive", "runs"}))
        ->capture_default_str();
    cmd->add_flag("--check", opt.check_invariants, "Validate the forest after every step (slow)");
  }

  EstimateOptions resolve() const {
    EstimateOptions o = opt;
    if (mcs_im >= 0) o.mcs_im = mcs_im;
    o.heuristic = heuristic == "random" ? Heuristic::Random : Heuristic::MaxMI;
    o.eviction = eviction == "group" ? EvictionPolicy::WholeGroup : EvictionPolicy::LargestFirst;
    o.grouping = grouping == "runs" ? Grouping::ConsecutiveRuns : Grouping::Transitive;
    return o;
  }
};

Model load(const std::string& path, const std::string& evid) {
  Model m = read_uai_file(path);
  if (!evid.empty()) m = apply_evidence(m, read_evidence_file(evid));
  return m;
}

void write_json(const nlohmann::json& j, const std::string& path) {
  if (path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << j.dump(2) << '\n';
}

int run_infer(const std::string& path, const std::string& evid, const EstimateFlags& flags,
              const std::string& json_out, bool timing) {
  const Model m = load(path, evid);
  const EstimateOptions opt = flags.resolve();
  const PrEstimate est = estimate_log_pr(m, opt);
  // Keep stdout clean for the JSON trace when it goes there.
  std::ostream& out = json_out == "-" ? std::cerr : std::cout;
  out << "log10 PR = " << fmt_log10(est.log10_pr) << '\n'
      << "components = " << est.components.size() << ", peak clique size = "
      << est.peak_clique_size << ", approximated = " << (est.approximated ? "yes" : "no")
      << ", time = " << est.wall_seconds << " s\n";
  if (!json_out.empty()) write_json(estimate_json(est, opt, timing), json_out);
  return kOk;
}

int run_oracle(const std::string& path, const std::string& evid, double cap_log2) {
  const Model m = load(path, evid);
  const auto cap = static_cast<std::size_t>(std::exp2(cap_log2));
  const FullCompileStats full = full_compile_stats(m, cap);
  std::cout << "min-fill max clique size = " << full.max_clique_size << '\n';
  if (full.log_pr)
    std::cout << "log10 PR (junction tree) = " << fmt_log10(*full.log_pr / std::log(10.0)) << '\n';
  else
    std::cout << "log10 PR (junction tree) = skipped, largest clique above the cap\n";
  try {
    std::cout << "log10 PR (brute force) = " << fmt_log10(brute_force_log_pr(m, cap) / std::log(10.0))
              << '\n';
  } catch (const CapExceeded&) {
    std::cout << "log10 PR (brute force) = skipped, state space above the cap\n";
  }
  return kOk;
}

std::map<std::string, double> read_reference(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  std::map<std::string, double> ref;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("expected name,log10_pr", n);
    const std::string name = line.substr(0, comma), value = line.substr(comma + 1);
    if (name == "name") continue;
    try {
      ref[name] = parse_log10(value);
    } catch (const std::exception&) {
      throw ParseError("bad reference value '" + value + "'", n);
    }
  }
  return ref;
}

int run_bench(const std::string& dir, const std::string& ref_path, const EstimateFlags& flags) {
  const auto ref = read_reference(ref_path);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".uai") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  const EstimateOptions opt = flags.resolve();

  std::cout << "name,vars,factors,log10_est,log10_ref,error,peak_clique_size,approximated,seconds\n";
  double sum = 0.0, worst = 0.0, best = 0.0;
  int compared = 0, failed = 0;
  for (const auto& f : files) {
    const std::string name = f.filename().string();
    Model m;
    PrEstimate est;
    try {
      fs::path evid = f;
      evid += ".evid";
      m = load(f.string(), fs::exists(evid) ? evid.string() : "");
      est = estimate_log_pr(m, opt);
    } catch (const Error& e) {
      std::cout << name << ",,,,,,,,\n";
      std::cerr << name << ": " << e.what() << '\n';
      ++failed;
      continue;
    }
    std::string ref_s = "", err_s = "";
    if (auto it = ref.find(name); it != ref.end()) {
      ref_s = fmt_log10(it->second);
      const ErrorValue err = compare_error(est.log10_pr, it->second);
      if (err.comparable) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", err.error);
        err_s = buf;
        sum += err.error;
        worst = compared ? std::max(worst, err.error) : err.error;
        best = compared ? std::min(best, err.error) : err.error;
        ++compared;
      } else {
        err_s = "incomparable";
      }
    }
    std::cout << name << ',' << m.num_vars() << ',' << m.factors.size() << ','
              << fmt_log10(est.log10_pr) << ',' << ref_s << ',' << err_s << ','
              << est.peak_clique_size << ',' << (est.approximated ? 1 : 0) << ','
              << est.wall_seconds << '\n';
  }
  std::cerr << files.size() << " models, " << compared << " compared, " << failed << " failed";
  if (compared)
    std::cerr << "; error avg " << sum / compared << " max " << worst << " min " << best;
  std::cerr << '\n';
  return failed ? kFailure : kOk;
}

int run_generate(const std::string& dir, int count, std::uint64_t seed, const RandomModelSpec& spec,
                 double cap_log2) {
  fs::create_directories(dir);
  std::mt19937_64 rng(seed);
  std::ofstream ref(fs::path(dir) / "ref.csv");
  ref << "name,log10_pr\n";
  const auto cap = static_cast<std::size_t>(std::exp2(cap_log2));
  for (int i = 0; i < count; ++i) {
    const Model m = random_connected_model(rng, spec);
    char name[32];
    std::snprintf(name, sizeof name, "model_%03d.uai", i);
    std::ofstream(fs::path(dir) / name) << write_uai(m);
    try {
      ref << name << ',' << std::setprecision(17) << brute_force_log_pr(m, cap) / std::log(10.0)
          << '\n';
    } catch (const CapExceeded&) {
    }
  }
  std::cout << "wrote " << count << " models to " << dir << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partition function estimation for discrete graphical models"};
  app.require_subcommand(1);

  std::string model_path, evid_path, json_out, dir, ref_path;
  bool timing = false;
  double cap_log2 = 22;
  EstimateFlags infer_flags, bench_flags;

  auto* infer = app.add_subcommand("infer", "Estimate log10 of the partition function");
  infer->add_option("model", model_path, "UAI model file")->required();
  infer->add_option("--evid", evid_path, "UAI evidence file");
  infer_flags.add(infer);
  infer->add_option("--json", json_out, "Write the run trace as JSON ('-' for stdout)");
  infer->add_flag("--timing", timing, "Include wall time in the JSON trace");

  auto* oracle = app.add_subcommand("oracle", "Exact answers: brute force and min-fill junction tree");
  oracle->add_option("model", model_path, "UAI model file")->required();
  oracle->add_option("--evid", evid_path, "UAI evidence file");
  oracle->add_option("--cap", cap_log2, "log2 of the largest table to build")->capture_default_str();

  auto* bench = app.add_subcommand("bench", "Run every .uai file in a directory against references");
  bench->add_option("dir", dir, "Directory of .uai files (model.uai.evid is used when present)")
      ->required();
  bench->add_option("--ref", ref_path, "CSV with name,log10_pr rows")->required();
  bench_flags.add(bench);

  RandomModelSpec spec;
  int count = 10;
  std::uint64_t gen_seed = 1;
  auto* gen = app.add_subcommand("generate", "Write a suite of random connected models");
  gen->add_option("dir", dir, "Output directory")->required();
  gen->add_option("--count", count, "Number of models")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Seed")->capture_default_str();
  gen->add_option("--min-vars", spec.min_vars)->capture_default_str();
  gen->add_option("--max-vars", spec.max_vars)->capture_default_str();
  gen->add_option("--min-card", spec.min_card)->capture_default_str();
  gen->add_option("--max-card", spec.max_card)->capture_default_str();
  gen->add_option("--extra-factors", spec.extra_factor_ratio, "Extra factors per variable")
      ->capture_default_str();
  gen->add_option("--zero-fraction", spec.zero_fraction)->capture_default_str();
  gen->add_option("--cap", cap_log2, "log2 state cap for the brute-force references")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kParse;
  }

  try {
    if (*infer) return run_infer(model_path, evid_path, infer_flags, json_out, timing);
    if (*oracle) return run_oracle(model_path, evid_path, cap_log2);
    if (*bench) return run_bench(dir, ref_path, bench_flags);
    if (*gen) return run_generate(dir, count, gen_seed, spec, cap_log2);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const InvariantError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  } catch (const CalibrationError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  } catch (const CapExceeded& e) {
    std::cerr << "cap exceeded: " << e.what() << '\n';
    return kCap;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
