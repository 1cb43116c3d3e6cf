// Copyright 2026 The detcert Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "detcert/cli.hpp"
#include "support.hpp"

using namespace detcert;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "detcert");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("detcert_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Query against the toy detector with absolute paths.
json toy_query_json(std::size_t image, json perturbation, json budgets) {
  const fs::path toy = detcert::testing::toy_dir();
  const GroundTruth g = detcert::testing::toy_ground_truth(image);
  return json{{"model", (toy / "model.json").string()},
              {"image", (toy / ("image_" + std::to_string(image) + ".json")).string()},
              {"ground_truth", {{"box", {g.box.z0, g.box.z1, g.box.z2, g.box.z3}}, {"class_id", g.class_id}}},
              {"tau_iou", 0.5},
              {"tau_class", 0.15},
              {"perturbation", std::move(perturbation)},
              {"budgets", std::move(budgets)},
              {"solver", {{"max_depth", 10}, {"timeout", 60}}}};
}

fs::path write_query(const fs::path& dir, const json& q) {
  const fs::path p = dir / "query.json";
  std::ofstream(p) << q.dump(2);
  return p;
}

}  // namespace

TEST_CASE("verify exit codes and report rows") {
  const fs::path dir = scratch("verify");
  SUBCASE("robust batch") {
    const fs::path q = write_query(dir, toy_query_json(0, {{"kind", "brightness"}}, {0.0, 0.05, 0.1}));
    const Result r = run_cli({"verify", "--query", q.string(), "--csv", (dir / "out.csv").string()});
    CHECK(r.code == cli::kExitRobust);
    const json report = json::parse(r.out);
    REQUIRE(report.size() == 3);
    CHECK(report[0]["epsilon"] == 0.0);
    CHECK(report[2]["epsilon"] == 0.1);
    for (const auto& row : report) {
      CHECK(row["verdict"] == "ROBUST");
      CHECK(row["counterexample"].is_null());
      CHECK(row["engine_version"] == cli::kEngineVersion);
      CHECK(row["schema_version"] == cli::kReportSchemaVersion);
      CHECK(row.contains("wall_time_s"));
    }
    const std::string csv = slurp(dir / "out.csv");
    CHECK(csv.rfind("image,perturbation,angle,epsilon,verdict,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  }
  SUBCASE("counterexample gives exit 1") {
    const fs::path q = write_query(dir, toy_query_json(3, {{"kind", "contrast"}}, {0.0, 1.0}));
    const Result r = run_cli({"verify", "--query", q.string(), "--out", (dir / "report.json").string()});
    CHECK(r.code == cli::kExitNonRobust);
    const json report = json::parse(slurp(dir / "report.json"));
    REQUIRE(report.size() == 2);
    CHECK(report[1]["verdict"] == "NONROBUST");
    CHECK(report[1]["counterexample"]["violation"].is_string());
    CHECK(r.out.find("NONROBUST") != std::string::npos);  // summary goes to stdout with --out
  }
  SUBCASE("undecided row gives exit 2") {
    const fs::path q = write_query(dir, toy_query_json(3, {{"kind", "contrast"}}, {1.0}));
    const Result r = run_cli({"verify", "--query", q.string(), "--timeout", "1e-12"});
    CHECK(r.code == cli::kExitUnknown);
    CHECK(json::parse(r.out)[0]["timed_out"] == true);
  }
  SUBCASE("without timing the report is reproducible") {
    const fs::path q = write_query(dir, toy_query_json(4, {{"kind", "motionblur"}, {"angle", 45}, {"kernel_size", 5}},
                                                       {0.3, 1.0}));
    const Result a = run_cli({"verify", "--query", q.string(), "--no-timing", "--workers", "2"});
    const Result b = run_cli({"verify", "--query", q.string(), "--no-timing", "--workers", "1"});
    CHECK(a.out == b.out);
    CHECK_FALSE(json::parse(a.out)[0].contains("wall_time_s"));
  }
}

TEST_CASE("bad inputs exit with 3") {
  const fs::path dir = scratch("bad");
  json q = toy_query_json(0, {{"kind", "brightness"}}, {0.1});
  SUBCASE("missing model") {
    q["model"] = (dir / "nope.json").string();
    CHECK(run_cli({"verify", "--query", write_query(dir, q).string()}).code == cli::kExitError);
  }
  SUBCASE("unknown field") {
    q["tau_iuo"] = 0.5;
    const Result r = run_cli({"verify", "--query", write_query(dir, q).string()});
    CHECK(r.code == cli::kExitError);
    CHECK(r.err.find("tau_iuo") != std::string::npos);
  }
  SUBCASE("misdetected image") {
    q["ground_truth"]["box"] = {4, 4, 8, 8};
    CHECK(run_cli({"verify", "--query", write_query(dir, q).string()}).code == cli::kExitError);
  }
  SUBCASE("unknown perturbation") {
    q["perturbation"] = {{"kind", "rotation"}};
    CHECK(run_cli({"verify", "--query", write_query(dir, q).string()}).code == cli::kExitError);
  }
  SUBCASE("missing query file") {
    CHECK(run_cli({"verify", "--query", (dir / "absent.json").string()}).code == cli::kExitError);
  }
  SUBCASE("zero falsification samples") {
    CHECK(run_cli({"falsify", "--query", write_query(dir, q).string(), "--n", "0"}).code == cli::kExitError);
  }
  SUBCASE("no subcommand") { CHECK(run_cli({}).code == cli::kExitError); }
  SUBCASE("help") { CHECK(run_cli({"--help"}).code == 0); }
}

TEST_CASE("query files") {
  const fs::path dir = scratch("files");
  SUBCASE("relative paths and row order") {
    const cli::QueryFile f = cli::load_query_file(detcert::testing::toy_dir() / "query.json");
    CHECK(f.images.size() == detcert::testing::kToyImages);
    CHECK(f.perturbations.size() == 4);
    CHECK(f.budgets.size() == 6);
    CHECK(f.solver.max_depth == 10);
    const auto rows = cli::expand_rows(f);
    REQUIRE(rows.size() == 6 * 4 * 6);
    CHECK(rows[0].image == "image_0.json");
    CHECK(rows[1].query.perturbation.epsilon == 0.05);
    CHECK(rows[6].query.perturbation.kind == PerturbationKind::contrast);
    CHECK(rows[24].image == "image_1.json");
    CHECK(rows[24].query.max_depth == 10);
  }
  SUBCASE("schema errors") {
    json q = toy_query_json(0, {{"kind", "brightness"}}, {0.1});
    q.erase("budgets");
    CHECK_THROWS_AS(cli::load_query_file(write_query(dir, q)), cli::QueryFileError);
    q = toy_query_json(0, {{"kind", "brightness"}}, {0.1});
    q["solver"]["bounding"] = "exact";
    CHECK_THROWS(cli::load_query_file(write_query(dir, q)));
  }
}

TEST_CASE("falsify writes counterexample images") {
  const fs::path dir = scratch("falsify");
  const fs::path q = write_query(dir, toy_query_json(3, {{"kind", "contrast"}}, {0.05, 1.0}));
  const Result r = run_cli({"falsify", "--query", q.string(), "--n", "50", "--cex-dir", (dir / "cex").string()});
  CHECK(r.code == cli::kExitNonRobust);
  const json report = json::parse(r.out);
  REQUIRE(report.size() == 2);
  CHECK_FALSE(fs::exists(dir / "cex" / "counterexample_0.json"));
  REQUIRE(fs::exists(dir / "cex" / "counterexample_1.json"));
  const Tensor img = load_image(dir / "cex" / "counterexample_1.json");
  const VerificationQuery vq = detcert::testing::toy_query(3, PerturbationKind::contrast, 1.0);
  CHECK(check_image(vq, img) != Violation::none);

  const fs::path clean = write_query(dir, toy_query_json(3, {{"kind", "contrast"}}, {0.05}));
  CHECK(run_cli({"falsify", "--query", clean.string(), "--n", "50"}).code == 0);
}

TEST_CASE("tightness command") {
  SUBCASE("degenerate offsets give zero width and zero improvement") {
    const Result r = run_cli({"tightness", "--n", "1", "--width-min", "0", "--width-max", "0"});
    CHECK(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc["below"]["count"] == 1);
    CHECK(doc["mean_improvement_pct"] == 0.0);
  }
  SUBCASE("optimal bounds dominate on every instance") {
    const cli::TightnessReport rep = cli::run_tightness(10000, 5, 0.0, 0.6);
    CHECK(rep.instances == 10000);
    CHECK(rep.dominance_violations == 0);
    std::size_t total = rep.below.count + rep.above.count;
    for (const auto& b : rep.buckets) total += b.count;
    CHECK(total == 10000);
    CHECK(rep.buckets.size() == 10);
    CHECK(rep.buckets.front().lo == 0.01);
    CHECK(rep.buckets.back().hi == 0.99);
  }
  SUBCASE("invalid widths") {
    CHECK(run_cli({"tightness", "--width-min", "0.5", "--width-max", "0.1"}).code == cli::kExitError);
  }
}
