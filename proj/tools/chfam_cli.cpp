#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "chfam/experiment.hpp"

namespace fs = std::filesystem;
using namespace chfam;

namespace {

constexpr int kExitConfig = 2;

struct CommonFlags {
  std::string out;
  bool strict = false;
  std::string format;
};

void apply_flags(ExperimentConfig& cfg, const CommonFlags& f) {
  if (!f.out.empty()) cfg.output.directory = f.out;
  if (f.strict) cfg.boundary.strict = true;
  if (!f.format.empty()) apply_setting(cfg, "output.format", f.format);
}

void print_verdicts(const RunResult& r, std::ostream& os) {
  for (const auto& v : r.verdicts) {
    std::string status(to_string(v.status));
    std::transform(status.begin(), status.end(), status.begin(), ::toupper);
    os << status << "  " << v.name << ": measured " << format_double(v.measured);
    if (!v.comparison.empty()) os << " (" << v.comparison << ' ' << format_double(v.tolerance) << ')';
    if (!v.note.empty()) os << "  [" << v.note << ']';
    os << '\n';
  }
}

int finish(const RunResult& r) {
  const auto paths = emit_outputs(r);
  std::cout << r.config.name << " (" << to_string(r.config.scenario) << ", consistency checks)\n";
  print_verdicts(r, std::cout);
  for (const auto& p : paths) std::cout << "wrote " << p.string() << '\n';
  return r.exit_code();
}

int cmd_run(const std::string& path, const CommonFlags& flags) {
  ExperimentConfig cfg = load_config(path);
  apply_flags(cfg, flags);
  cfg.validate();
  return finish(run(cfg));
}

int cmd_check_identities(std::uint64_t seed, const CommonFlags& flags) {
  ExperimentConfig cfg;
  cfg.scenario = Scenario::identity_suite;
  cfg.name = "identities";
  cfg.seed = seed;
  cfg.num_points = 2048;
  cfg.half_length = 32.0;
  cfg.output.directory = "out/identities";
  apply_flags(cfg, flags);
  cfg.validate();
  return finish(run(cfg));
}

struct Axis {
  std::string key;
  std::vector<std::string> values;
};

Axis parse_axis(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--vary expects key=v1,v2,..., got '" + spec + "'");
  Axis a{spec.substr(0, eq), {}};
  std::string rest = spec.substr(eq + 1);
  // Bracketed values ([a, b]) keep their commas.
  std::string cur;
  int depth = 0;
  for (char c : rest) {
    if (c == '[') ++depth;
    if (c == ']') --depth;
    if (c == ',' && depth == 0) {
      a.values.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  a.values.push_back(cur);
  if (std::any_of(a.values.begin(), a.values.end(), [](const std::string& v) { return v.empty(); }))
    throw ConfigError("--vary " + a.key + ": empty value in list");
  return a;
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-' && c != '_') c = '_';
  return s;
}

int cmd_sweep(const std::string& path, const std::vector<std::string>& vary, unsigned jobs, const CommonFlags& flags) {
  ExperimentConfig base = load_config(path);
  apply_flags(base, flags);
  std::vector<Axis> axes;
  for (const auto& v : vary) axes.push_back(parse_axis(v));

  // Cartesian product, validated up front so a bad value fails before any run starts.
  struct Job {
    ExperimentConfig cfg;
    std::vector<std::string> values;
  };
  std::vector<Job> work{{base, {}}};
  for (const auto& ax : axes) {
    std::vector<Job> next;
    for (const auto& j : work) {
      for (const auto& val : ax.values) {
        Job k = j;
        apply_setting(k.cfg, ax.key, val);
        k.values.push_back(val);
        next.push_back(std::move(k));
      }
    }
    work = std::move(next);
  }
  const fs::path root(base.output.directory);
  for (auto& j : work) {
    std::string dir = base.name;
    for (std::size_t a = 0; a < axes.size(); ++a) dir += "__" + sanitize(axes[a].key) + "=" + sanitize(j.values[a]);
    j.cfg.output.directory = (root / dir).string();
    j.cfg.validate();
  }

  std::vector<int> codes(work.size(), 0);
  std::vector<std::string> errors(work.size());
  std::atomic<std::size_t> next{0};
  std::mutex log;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < work.size();) {
      try {
        const RunResult r = run(work[i].cfg);
        emit_outputs(r);
        codes[i] = r.exit_code();
      } catch (const std::exception& e) {
        codes[i] = 1;
        errors[i] = e.what();
      }
      std::lock_guard lock(log);
      std::cout << "[" << i + 1 << "/" << work.size() << "] " << work[i].cfg.output.directory << " -> exit " << codes[i]
                << '\n';
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(work.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  fs::create_directories(root);
  std::ofstream idx(root / "sweep_index.csv");
  idx << "run_dir";
  for (const auto& ax : axes) idx << ',' << ax.key;
  idx << ",exit_code,error\n";
  for (std::size_t i = 0; i < work.size(); ++i) {
    idx << fs::path(work[i].cfg.output.directory).filename().string();
    for (const auto& v : work[i].values) idx << ",\"" << v << '"';
    idx << ',' << codes[i] << ",\"" << errors[i] << "\"\n";
  }
  std::cout << "wrote " << (root / "sweep_index.csv").string() << '\n';

  if (std::find(codes.begin(), codes.end(), 3) != codes.end()) return 3;
  return std::any_of(codes.begin(), codes.end(), [](int c) { return c != 0; }) ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudospectral laboratory for the generalized Camassa-Holm family"};
  app.require_subcommand(1);
  CommonFlags flags;
  app.add_option("--out", flags.out, "Output directory");
  app.add_flag("--strict", flags.strict, "Treat boundary-decay warnings as errors");
  app.add_option("--format", flags.format, "Output format")->check(CLI::IsMember({"csv", "json", "both"}));
  app.fallthrough();

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Run one experiment");
  run_cmd->add_option("config", config_path, "Config file")->required();

  std::vector<std::string> vary;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter sweep");
  sweep_cmd->add_option("config", config_path, "Base config file")->required();
  sweep_cmd->add_option("--vary", vary, "section.key=v1,v2,... (repeatable)")->required();
  sweep_cmd->add_option("--jobs", jobs, "Worker threads");

  std::uint64_t seed = 0;
  auto* ident_cmd = app.add_subcommand("check-identities", "Run the seeded static identity battery");
  ident_cmd->add_option("--seed", seed, "Random seed");

  auto* version_cmd = app.add_subcommand("version", "Print the version");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*version_cmd) {
      std::cout << "chfam " << version() << '\n';
      return 0;
    }
    if (*run_cmd) return cmd_run(config_path, flags);
    if (*sweep_cmd) return cmd_sweep(config_path, vary, jobs, flags);
    if (*ident_cmd) return cmd_check_identities(seed, flags);
  } catch (const ConfigError& e) {
    std::cerr << "chfam: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const BoundaryDecayError& e) {
    std::cerr << "chfam: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    std::cerr << "chfam: invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "chfam: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
