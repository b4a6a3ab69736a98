#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "medsamp/medsamp.hpp"

using namespace medsamp;

namespace {

ExperimentConfig cfg_of(const std::string& text) { return parse_config(nlohmann::json::parse(text)); }

const SweepRow& row_at(const SweepResult& r, std::size_t n, std::size_t e = 0) {
  for (const auto& row : r.rows)
    if (row.n == n && row.estimator_index == e) return row;
  throw std::logic_error("missing row");
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = cfg_of(R"({"experiment":"efht-sweep","n":[8,16],"noise":{"kind":"one-bit","p":0.1},
                            "estimators":[{"strategy":"median","preset":"2n3+1"},{"strategy":"mean","m":4}]})");
  CHECK(c.kind == ExperimentKind::efht_sweep);
  CHECK(c.n == std::vector<std::size_t>{8, 16});
  CHECK(c.noise.p == Fraction(1, 10));
  REQUIRE(c.estimators.size() == 2);
  CHECK(c.estimators[0].resolve(8).m == 1025);

  CHECK_THROWS_AS(cfg_of(R"({"experiment":"efht-sweep","n":[16,8]})"), UsageError);
  CHECK_THROWS_AS(cfg_of(R"({"experiment":"efht-sweep","n":[]})"), UsageError);
  CHECK_THROWS_AS(cfg_of(R"({"experiment":"plot","n":[8]})"), UsageError);
  CHECK_THROWS_AS(cfg_of(R"({"experiment":"simulate","n":[8],"replicates":0})"), UsageError);
  CHECK_THROWS_AS(cfg_of(R"({"experiment":"simulate","n":[8],"estimator":{"strategy":"raw","m":3}})"), UsageError);
  CHECK_THROWS_AS(cfg_of(R"({"experiment":"simulate","n":["eight"]})"), UsageError);
}

TEST_CASE("config hash is stable and round-trips through the header") {
  auto c = cfg_of(R"({"experiment":"simulate","n":[10],"noise":{"kind":"partial"},"seed":4})");
  const auto h = config_hash(c);
  CHECK(h.size() == 16);
  CHECK(config_hash(parse_config(to_json(c))) == h);
  auto other = c;
  other.seed = 5;
  CHECK(config_hash(other) != h);
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);

  std::ostringstream os;
  write_csv_header(os, {"9.9.9", c});
  std::istringstream is(os.str());
  std::string version, hash, config;
  std::getline(is, version);
  std::getline(is, hash);
  std::getline(is, config);
  CHECK(version == "# medsamp 9.9.9");
  CHECK(hash == "# config_hash " + h);
  REQUIRE(config.rfind("# config ", 0) == 0);
  CHECK(config_hash(parse_config(nlohmann::json::parse(config.substr(9)))) == h);
}

TEST_CASE("log-log slope fit") {
  CHECK(loglog_slope({10, 100, 1000}, {2, 4, 6}) == Catch::Approx(2.0));
  CHECK(loglog_slope({2, 4}, {0, std::log10(8.0L)}) == Catch::Approx(3.0));
  CHECK_THROWS_AS(loglog_slope({2}, {1}), UsageError);
}

TEST_CASE("noiseless sweep grows like n log n") {
  const auto r = cmd_efht_sweep(cfg_of(R"({"experiment":"efht-sweep","n":[8,16,32,64],"noise":{"kind":"none"}})"));
  CHECK(r.exit_code == kExitOk);
  REQUIRE(r.slopes.size() == 1);
  REQUIRE(r.slopes[0].slope);
  CHECK(*r.slopes[0].slope >= 1.0L);
  CHECK(*r.slopes[0].slope <= 1.4L);
  for (const auto& row : r.rows) CHECK(row.expected_evaluations == Catch::Approx(1 + 2 * row.efht_iterations));
}

TEST_CASE("partial noise, mean sampling with m = n^3 stays polynomial") {
  const auto r = cmd_efht_sweep(cfg_of(
      R"({"experiment":"efht-sweep","n":[20,30,40],"noise":{"kind":"partial"},"estimator":{"strategy":"mean","preset":"n3"}})"));
  CHECK(r.exit_code == kExitOk);
  for (const auto& row : r.rows) {
    CHECK_FALSE(row.error);
    CHECK_FALSE(row.overflow);
    CHECK(row.m == row.n * row.n * row.n);
  }
  CHECK(r.slopes[0].slope);
}

TEST_CASE("partial noise, median m = 101: log EFHT strictly convex in n, overflow by n = 40") {
  const auto r = cmd_efht_sweep(cfg_of(
      R"({"experiment":"efht-sweep","n":[20,30,40],"noise":{"kind":"partial"},"estimator":{"strategy":"median","m":101}})"));
  const Real a = row_at(r, 20).log10_efht, b = row_at(r, 30).log10_efht, c = row_at(r, 40).log10_efht;
  CHECK(a < b);
  CHECK(b < c);
  CHECK(row_at(r, 40).overflow);
  // slope needs three non-overflow rows
  CHECK_FALSE(r.slopes[0].slope);
  CHECK(c - b > b - a);
}

TEST_CASE("sweep reports cost-guard failures per row and continues") {
  const auto r = cmd_efht_sweep(cfg_of(R"({"experiment":"efht-sweep","n":[4,6],"noise":{"kind":"one-bit","p":0.5},
      "estimators":[{"strategy":"mean","m":3},{"strategy":"mean","m":20000}]})"));
  for (std::size_t n : {4, 6}) {
    CHECK_FALSE(row_at(r, n, 0).error);
    CHECK(row_at(r, n, 0).efht_iterations > 0);
    CHECK(row_at(r, n, 1).error.code == kExitCostGuard);
  }
  CHECK(r.exit_code == kExitCostGuard);

  const auto bad = cmd_efht_sweep(cfg_of(
      R"({"experiment":"efht-sweep","n":[1,4],"noise":{"kind":"segmented"},"estimator":{"strategy":"median","m":3}})"));
  CHECK(row_at(bad, 1).error.code == kExitUsage);
  CHECK(bad.exit_code == kExitUsage);
}

TEST_CASE("sweep output is independent of the thread count") {
  const auto c = cfg_of(R"({"experiment":"efht-sweep","n":[5,9,13],"noise":{"kind":"one-bit","p":"1/3"},
                            "estimators":[{"strategy":"median","m":5},{"strategy":"mean","m":3}]})");
  std::ostringstream a, b;
  write(a, cmd_efht_sweep(c, 1), OutputFormat::csv, {"t", c});
  write(b, cmd_efht_sweep(c, 4), OutputFormat::csv, {"t", c});
  CHECK(a.str() == b.str());
}

TEST_CASE("quantile audit") {
  SECTION("segmented, n = 100: monotone") {
    const auto a = quantile_audit(NoiseModelSpec::segmented({}, {}, true).resolve(100));
    CHECK(a.monotone);
    CHECK_FALSE(a.witness);
    for (std::size_t i = 0; i < 100; ++i) CHECK(a.rows[i + 1].quantile < a.rows[i].quantile);
  }
  SECTION("partial, n = 10: witness (4, 5)") {
    const auto a = quantile_audit(NoiseModelSpec::partial().resolve(10));
    CHECK_FALSE(a.monotone);
    REQUIRE(a.witness);
    CHECK(*a.witness == std::make_pair<std::size_t, std::size_t>(4, 5));
    CHECK(a.rows[4].quantile == Value(2));
    CHECK(a.rows[5].quantile == Value(5));
  }
  SECTION("noise-free: monotone") {
    for (std::size_t n : {1, 2, 7, 30}) CHECK(quantile_audit(NoiseModelSpec::none().resolve(n)).monotone);
  }
}

TEST_CASE("lemma checks") {
  SECTION("segmented, median preset, n = 100, l = log2 n, c = 1/15") {
    const auto r = cmd_lemma_check(cfg_of(R"({"experiment":"lemma-check","n":100,
        "noise":{"kind":"segmented","faithful":true},"estimator":{"strategy":"median","preset":"2n3+1"},
        "checks":[{"lemma":"lemma3","l":"log2n","c":"1/15"}]})"));
    REQUIRE(r.rows.size() == 1);
    CHECK(r.exit_code == kExitOk);
    REQUIRE(r.rows[0].pass);
    CHECK(*r.rows[0].pass);
  }
  SECTION("partial, median m = 101, n = 96, l = 2, c = 16") {
    const auto r = cmd_lemma_check(cfg_of(R"({"experiment":"lemma-check","n":96,"noise":{"kind":"partial"},
        "estimator":{"strategy":"median","m":101},"checks":[{"lemma":"lemma5","l":2,"c":16}]})"));
    REQUIRE(r.rows.size() == 1);
    REQUIRE(r.rows[0].pass);
    CHECK(*r.rows[0].pass);
  }
  SECTION("one-bit p = 1, n = 100, i = 40, m = 2n^3+1") {
    const auto r = cmd_lemma_check(cfg_of(R"({"experiment":"lemma-check","n":100,"noise":{"kind":"one-bit","p":1},
        "estimator":{"strategy":"median","preset":"2n3+1"},"checks":[{"lemma":"lemma2","p":1,"i":40}]})"));
    REQUIRE_FALSE(r.rows.empty());
    CHECK(r.rows[0].condition.rfind("case i:", 0) == 0);
    REQUIRE(r.rows[0].probability);
    CHECK(*r.rows[0].probability >= 1.0L - 1e-6L);
  }
  SECTION("precondition violations are usage errors per check") {
    const auto r = cmd_lemma_check(cfg_of(R"({"experiment":"lemma-check","n":20,"noise":{"kind":"partial"},
        "estimator":{"strategy":"median","m":5},
        "checks":[{"lemma":"lemma3","l":1,"c":"1/15"},{"lemma":"lemma5","l":2,"c":16},{"lemma":"lemma6","i":3}]})"));
    REQUIRE(r.rows.size() == 3);
    CHECK(r.rows[0].error.code == kExitUsage);
    CHECK_FALSE(r.rows[1].error);
    CHECK(r.rows[2].error.code == kExitUsage);
    CHECK(r.exit_code == kExitUsage);
  }
}

TEST_CASE("accept matrix, noise-free raw evaluation") {
  const auto ms = cmd_accept_matrix(cfg_of(R"({"experiment":"accept-matrix","n":[6],"noise":{"kind":"none"}})"));
  REQUIRE(ms.size() == 1);
  for (std::size_t i = 0; i <= 6; ++i)
    for (std::size_t j = 0; j <= 6; ++j) CHECK(ms[0].accept[i][j] == (j <= i ? 1.0L : 0.0L));
}

TEST_CASE("drift tables") {
  SECTION("one-bit p = 0.1, median m = 2001, n = 10: positive drift everywhere") {
    const auto ts = cmd_drift_table(cfg_of(R"({"experiment":"drift-table","n":10,"noise":{"kind":"one-bit","p":0.1},
        "estimator":{"strategy":"median","m":2001}})"));
    REQUIRE(ts[0].rows.size() == 10);
    for (const auto& r : ts[0].rows) CHECK(r.total > 0);
  }
  SECTION("partial, median m = 101, n = 100: some state below n/2 drifts away") {
    const auto ts = cmd_drift_table(cfg_of(R"({"experiment":"drift-table","n":100,"noise":{"kind":"partial"},
        "estimator":{"strategy":"median","m":101}})"));
    bool found = false;
    for (const auto& r : ts[0].rows)
      if (r.i < 50 && r.total <= 0) found = true;
    CHECK(found);
    for (const auto& r : ts[0].rows) CHECK(std::fabs(r.total - r.direct) <= 1e-10L);
  }
  SECTION("invalid distance parameters are reported, not thrown") {
    const auto ts = cmd_drift_table(cfg_of(R"({"experiment":"drift-table","n":10,"noise":{"kind":"none"},
        "distance":{"kind":"case2","p":0.01}})"));
    CHECK(ts[0].error.code == kExitUsage);
  }
}

TEST_CASE("simulate: Monte Carlo agrees with the exact value") {
  const auto r = cmd_simulate(cfg_of(R"({"experiment":"simulate","n":10,"noise":{"kind":"none"},
      "replicates":10000,"seed":21})"));
  REQUIRE(r.cells.size() == 1);
  REQUIRE(r.cells[0].z_score);
  CHECK(std::fabs(*r.cells[0].z_score) <= 3.0L);
  CHECK_FALSE(r.cells[0].truncation_dominated);
}

TEST_CASE("simulate: a single replicate is byte-identical across reruns") {
  const auto c = cfg_of(R"({"experiment":"simulate","n":12,"noise":{"kind":"one-bit","p":0.25},
      "estimator":{"strategy":"median","m":3},"replicates":1,"seed":99})");
  for (auto f : {OutputFormat::csv, OutputFormat::json}) {
    std::ostringstream a, b;
    write(a, cmd_simulate(c), f, {"t", c});
    write(b, cmd_simulate(c), f, {"t", c});
    CHECK(a.str() == b.str());
  }
}

TEST_CASE("simulate: one-bit p = 1, raw, n = 8, budget 1e6 truncates most runs") {
  const auto r = cmd_simulate(cfg_of(R"({"experiment":"simulate","n":8,"noise":{"kind":"one-bit","p":1},
      "replicates":101,"budget":1000000,"seed":3})"));
  REQUIRE(r.cells.size() == 1);
  CHECK(r.cells[0].truncation_dominated);
}

TEST_CASE("simulate: guard failures leave the Monte Carlo result in place") {
  const auto r = cmd_simulate(cfg_of(R"({"experiment":"simulate","n":4,"noise":{"kind":"one-bit","p":0.5},
      "estimator":{"strategy":"median","m":40},"replicates":20,"seed":3})"));
  REQUIRE(r.cells.size() == 1);
  CHECK_FALSE(r.cells[0].error);
  CHECK(r.cells[0].summary.hits == 20);
  if (!r.cells[0].exact_iterations) CHECK_FALSE(r.cells[0].exact_note.empty());
}
