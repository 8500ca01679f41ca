#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "chfam/experiment.hpp"
#include "test_support.hpp"

using namespace chfam;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("chfam_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

const VerdictStatus* status_of(const RunResult& r, const std::string& name) {
  for (const auto& v : r.verdicts)
    if (v.name == name) return &v.status;
  return nullptr;
}

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig c = parse_config(R"(
# leading comment
[run]
scenario = conservation   # trailing comment
name = "with # hash"
seed = 12

[model]
n = 3
dealias = two_thirds

[grid]
num_points = 256
half_length = 8pi

[profile]
kind = bump
support = [-1.5, 2]

[diagnostics]
lp_orders = [2, 4]
tail_window = [5, 15]
tail_side = left
)");
  CHECK(c.scenario == Scenario::conservation);
  CHECK(c.name == "with # hash");
  CHECK(c.seed == 12);
  CHECK(c.model.n == 3);
  CHECK(c.dealias == DealiasRule::two_thirds);
  CHECK(c.half_length == doctest::Approx(8 * testing::pi));
  CHECK(c.profile.kind == ProfileKind::bump);
  CHECK(c.profile.support_lo == -1.5);
  CHECK(c.diagnostics.lp_orders == std::vector<int>{2, 4});
  REQUIRE(c.diagnostics.tail);
  CHECK(c.diagnostics.tail->side == TailSide::left);
  CHECK(c.diagnostics.tail->x_hi == 15.0);

  SUBCASE("render round trip") {
    const std::string text = render_config(c);
    CHECK(render_config(parse_config(text)) == text);
    CHECK(config_settings(parse_config(text)) == config_settings(c));
  }
}

TEST_CASE("config errors name the problem") {
  auto message = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("[run]\nscenario = everything\n").find("unknown scenario") != std::string::npos);
  CHECK(message("[run]\nbogus = 1\n").find("unknown setting 'run.bogus'") != std::string::npos);
  CHECK(message("[grid]\nnum_points 12\n").find("line 2") != std::string::npos);
  CHECK(message("n = 1\n").find("outside any [section]") != std::string::npos);
  CHECK(message("[grid]\nnum_points = 7\n").find("num_points") != std::string::npos);
  CHECK(message("[grid]\nhalf_length = abc\n").find("grid.half_length") != std::string::npos);
  CHECK(message("[run]\nscenario = peakon_speed\n").find("peakon") != std::string::npos);
  CHECK(message("[run]\nscenario = vanishing_probe\n[model]\nn = 2\n").find("odd") != std::string::npos);
  CHECK(message("[control]\noutput_interval = 0\n").find("output_interval") != std::string::npos);
  CHECK(message("[profile]\nkind = exp_decay\ntheta = 1.5\n").find("theta") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/chfam.toml"), ConfigError);

  ExperimentConfig c;
  CHECK_THROWS_AS(apply_setting(c, "model.nn", "1"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "model.n", "1.5"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "output.format", "xml"), ConfigError);
}

TEST_CASE("conservation run on zero data") {
  ExperimentConfig c;
  c.scenario = Scenario::conservation;
  c.num_points = 64;
  c.half_length = 10.0;
  c.profile.amplitude = 0.0;
  c.control.t_end = 0.5;
  c.output_interval = 0.25;
  const RunResult r = run(c);
  REQUIRE(r.verdicts.size() == 2);
  for (const auto& v : r.verdicts) {
    CHECK(v.status == VerdictStatus::pass);
    CHECK(v.measured == 0.0);
    CHECK_FALSE(v.anchor.empty());
  }
  CHECK(r.exit_code() == 0);
  REQUIRE(r.records.size() == 3);
  for (std::size_t k = 1; k < r.records.size(); ++k) CHECK(r.records[k].time > r.records[k - 1].time);
}

TEST_CASE("outputs") {
  SUBCASE("three records give three rows") {
    ExperimentConfig c;
    c.scenario = Scenario::custom;
    c.num_points = 128;
    c.half_length = 16.0;
    c.control.t_end = 0.2;
    c.output_interval = 0.1;
    c.output.directory = scratch("rows").string();
    const RunResult r = run(c);
    emit_outputs(r);
    const auto rows = lines(slurp(fs::path(c.output.directory) / "records.csv"));
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].rfind("time,H1,H,", 0) == 0);
    CHECK(rows[1].rfind("0,", 0) == 0);
    CHECK(rows[2].rfind("0.1,", 0) == 0);
    CHECK(rows[3].rfind("0.2,", 0) == 0);
    CHECK(fs::exists(fs::path(c.output.directory) / "result.json"));
  }
  SUBCASE("no records give a header-only CSV") {
    ExperimentConfig c;
    c.scenario = Scenario::identity_suite;
    c.num_points = 256;
    c.half_length = 32.0;
    c.checks.identity_profiles = 2;
    c.output.directory = scratch("empty").string();
    c.output.json = false;
    const RunResult r = run(c);
    emit_outputs(r);
    CHECK(lines(slurp(fs::path(c.output.directory) / "records.csv")).size() == 1);
    CHECK_FALSE(fs::exists(fs::path(c.output.directory) / "result.json"));
    CHECK(fs::exists(fs::path(c.output.directory) / "identities.csv"));
  }
  SUBCASE("peakon snapshot at t = 0 has apex c^{1/n}") {
    ExperimentConfig c;
    c.scenario = Scenario::custom;
    c.model.n = 3;
    c.num_points = 256;
    c.half_length = 20.0;
    c.project_initial = false;
    c.profile.kind = ProfileKind::peakon;
    c.profile.amplitude = 8.0;
    c.control.t_end = 0.01;
    c.output_interval = 0.01;
    c.output.snapshots = true;
    c.boundary.threshold = 1e-6;
    c.output.directory = scratch("snap").string();
    const RunResult r = run(c);
    emit_outputs(r);
    const auto rows = lines(slurp(fs::path(c.output.directory) / "snapshots" / "snapshot_0000.csv"));
    REQUIRE(rows.size() == 2 + 256);
    CHECK(rows[1] == "x,u");
    CHECK(rows[2 + 128] == "0,2");
  }
}

TEST_CASE("decay persistence on zero data is vacuous") {
  ExperimentConfig c;
  c.scenario = Scenario::decay_persistence;
  c.num_points = 256;
  c.half_length = 40.0;
  c.profile.kind = ProfileKind::gaussian;
  c.profile.amplitude = 0.0;
  c.control.t_end = 0.1;
  c.output_interval = 0.05;
  const RunResult r = run(c);
  REQUIRE(status_of(r, "tail exponent floor"));
  CHECK(*status_of(r, "tail exponent floor") == VerdictStatus::inconclusive);
  CHECK(*status_of(r, "weighted sup growth N=10") == VerdictStatus::pass);
  CHECK(r.exit_code() == 0);
}

TEST_CASE("gaussian data decay faster than any exponential on fixed windows") {
  ExperimentConfig c;
  c.scenario = Scenario::decay_persistence;
  c.num_points = 1024;
  c.half_length = 40.0;
  c.profile.kind = ProfileKind::gaussian;
  c.profile.theta = 0.9;
  c.diagnostics.tail = TailWindow{2.0, 4.0, TailSide::right};
  c.control.t_end = 0.1;
  c.output_interval = 0.1;
  const RunResult r = run(c);
  REQUIRE(r.records.front().tail_fit);
  CHECK(r.records.front().tail_fit->exponent > 5.0);
}

TEST_CASE("vanishing probe on zero data") {
  ExperimentConfig c;
  c.scenario = Scenario::vanishing_probe;
  c.model.n = 3;
  c.num_points = 128;
  c.half_length = 20.0;
  c.profile.amplitude = 0.0;
  c.control.t_end = 0.1;
  const RunResult r = run(c);
  for (const auto& v : r.verdicts) CHECK(v.status == VerdictStatus::pass);
}

TEST_CASE("identity suite") {
  ExperimentConfig c;
  c.scenario = Scenario::identity_suite;
  c.num_points = 1024;
  c.half_length = 32.0;
  c.checks.identity_profiles = 6;

  SUBCASE("all checks pass and the zero profile is exact") {
    const RunResult r = run(c);
    for (const auto& v : r.verdicts) CHECK_MESSAGE(v.status == VerdictStatus::pass, v.name);
    const auto& row = r.tables.at("identities").front();
    CHECK(row.at("operator_error") == "0");
    CHECK(row.at("kernel_identity") == "0");
    CHECK(row.at("fprime_error") == "0");
    CHECK(row.at("sign_check") == "pass");
  }
  SUBCASE("even order only: sign structure is n/a") {
    c.checks.identity_orders = {2};
    const RunResult r = run(c);
    CHECK(*status_of(r, "sign structure") == VerdictStatus::not_applicable);
    CHECK(*status_of(r, "kernel identity") == VerdictStatus::pass);
    CHECK(r.tables.at("identities")[1].at("sign_check") == "n/a");
    CHECK(r.exit_code() == 0);
  }
  SUBCASE("deterministic output") {
    c.seed = 3;
    const std::string a = result_json(run(c));
    const std::string b = result_json(run(c));
    CHECK(a == b);
    c.seed = 4;
    CHECK(result_json(run(c)) != a);
  }
}

TEST_CASE("random fields are seeded") {
  const Grid g(128, 16.0);
  CHECK(max_abs_diff(random_smooth_field(g, 1, 2), random_smooth_field(g, 1, 2)) == 0.0);
  CHECK(max_abs_diff(random_smooth_field(g, 1, 2), random_smooth_field(g, 1, 3)) > 0.0);
  CHECK(max_abs_diff(random_smooth_field(g, 1, 2), random_smooth_field(g, 2, 2)) > 0.0);
}

TEST_CASE("blow-up is reported, not thrown") {
  ExperimentConfig c;
  c.scenario = Scenario::custom;
  c.num_points = 128;
  c.half_length = 16.0;
  c.profile.amplitude = 2.0;
  c.control.t_end = 1.0;
  c.control.blowup_threshold = 1.5;
  const RunResult r = run(c);
  CHECK(r.blew_up);
  CHECK(r.exit_code() == 3);
  REQUIRE(status_of(r, "integration"));
  CHECK(*status_of(r, "integration") == VerdictStatus::fail);
}

TEST_CASE("convergence study") {
  ExperimentConfig c;
  c.scenario = Scenario::convergence_study;
  c.num_points = 128;
  c.half_length = 16.0;
  c.profile.width = 1.5;
  c.control.t_end = 0.5;
  c.output_interval = 0.5;
  c.checks.refinements = 3;
  const RunResult r = run(c);
  REQUIRE(r.verdicts.size() == 1);
  CHECK(r.verdicts[0].status == VerdictStatus::pass);
  CHECK(r.verdicts[0].measured >= 3.8);
}
