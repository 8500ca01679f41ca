// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <future>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "chfam/experiment.hpp"

using namespace chfam;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = CHFAM_CONFIG_DIR;
const fs::path kScratch = CHFAM_SCRATCH_DIR;

struct Outcome {
  bool ok = false;
  std::string detail;
};

std::string verdict_line(const Verdict& v) {
  std::ostringstream os;
  os << v.name << " " << to_string(v.status) << " (" << format_double(v.measured) << " " << v.comparison << " "
     << format_double(v.tolerance) << ")";
  return os.str();
}

// Passes when every named verdict passes; n/a counts as a pass only if allowed.
Outcome verdicts_pass(const RunResult& r, const std::vector<std::string>& names) {
  Outcome o{true, ""};
  for (const auto& name : names) {
    bool found = false;
    for (const auto& v : r.verdicts) {
      if (v.name != name) continue;
      found = true;
      o.ok = o.ok && v.status == VerdictStatus::pass;
      o.detail += (o.detail.empty() ? "" : "; ") + verdict_line(v);
    }
    if (!found) {
      o.ok = false;
      o.detail += (o.detail.empty() ? "" : "; ") + name + " missing";
    }
  }
  if (r.blew_up) {
    o.ok = false;
    o.detail += "; blew up";
  }
  return o;
}

Outcome all_verdicts(const RunResult& r) {
  Outcome o{r.all_pass() && !r.verdicts.empty(), ""};
  for (const auto& v : r.verdicts) o.detail += (o.detail.empty() ? "" : "; ") + verdict_line(v);
  return o;
}

ExperimentConfig config(const std::string& file) { return load_config(kConfigs / file); }

Outcome conservation() {
  Outcome o{true, ""};
  for (int n : {1, 3}) {
    ExperimentConfig c = config("conservation.toml");
    c.model.n = n;
    const Outcome k = all_verdicts(run(c));
    o.ok = o.ok && k.ok;
    o.detail += (o.detail.empty() ? "" : " | ") + ("n=" + std::to_string(n) + ": " + k.detail);
  }
  return o;
}

Outcome peakon_transport() {
  std::vector<std::future<std::pair<std::string, Outcome>>> jobs;
  for (int n : {1, 2, 3}) {
    for (double c : {0.5, 1.0, 2.0}) {
      jobs.push_back(std::async(std::launch::async, [n, c] {
        ExperimentConfig cfg = config("peakon_speed.toml");
        cfg.model.n = n;
        cfg.profile.amplitude = c;
        return std::pair{"n=" + std::to_string(n) + " c=" + format_double(c), all_verdicts(run(cfg))};
      }));
    }
  }
  Outcome o{true, ""};
  for (auto& j : jobs) {
    auto [label, k] = j.get();
    o.ok = o.ok && k.ok;
    o.detail += (o.detail.empty() ? "" : " | ") + label + ": " + k.detail;
  }
  return o;
}

Outcome reflection() {
  Outcome o{true, ""};
  const Grid grid(512, 32.0);
  for (int n : {1, 3}) {
    Field u0 = random_smooth_field(grid, 0, 1);
    StepControl ctl;
    ctl.t_end = 1.0;
    const double d = reflection_defect(u0, ModelParams{n}, ctl, DynamicsOptions{DealiasRule::strict});
    o.ok = o.ok && d <= 1e-8;
    o.detail += (o.detail.empty() ? "" : "; ") + ("n=" + std::to_string(n) + " defect " + format_double(d));
  }
  o.detail += " (<= 1e-8)";
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome determinism() {
  // Both runs write to the same directory, since the directory is part of the recorded config.
  std::map<std::string, std::string> first;
  std::string detail;
  bool same = true;
  for (int k = 0; k < 2; ++k) {
    ExperimentConfig c = config("identity_suite.toml");
    c.seed = 0;
    c.output.directory = (kScratch / "determinism").string();
    fs::remove_all(c.output.directory);
    auto paths = emit_outputs(run(c));
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) {
      const std::string name = p.filename().string();
      if (k == 0) {
        first[name] = slurp(p);
        continue;
      }
      const bool eq = first.count(name) && first[name] == slurp(p);
      same = same && eq;
      detail += (detail.empty() ? "" : ", ") + name + (eq ? " identical" : " differs");
    }
  }
  return {same && !first.empty(), detail};
}

}  // namespace

int main() {
  fs::create_directories(kScratch);

  std::optional<RunResult> identity;
  auto suite = [&]() -> const RunResult& {
    if (!identity) identity = run(config("identity_suite.toml"));
    return *identity;
  };

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"conservation of H1 and H (n = 1, 3)", conservation},
      {"peakon transport speed and amplitude", peakon_transport},
      {"operator oracle equivalence", [&] { return verdicts_pass(suite(), {"Green-kernel oracle"}); }},
      {"kernel identity and positivity", [&] { return verdicts_pass(suite(), {"kernel identity", "kernel positivity"}); }},
      {"F' identity", [&] { return verdicts_pass(suite(), {"F' identity"}); }},
      {"RK4 convergence order", [] { return all_verdicts(run(config("convergence.toml"))); }},
      {"decay persistence", [] { return all_verdicts(run(config("decay_persistence.toml"))); }},
      {"no compact support", [] { return all_verdicts(run(config("compact_support.toml"))); }},
      {"reflection equivariance", reflection},
      {"weight identity", [&] { return verdicts_pass(suite(), {"weight identity"}); }},
      {"determinism", determinism},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.ok) ++failed;
    std::printf("%s %2zu %s: %s\n", o.ok ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
