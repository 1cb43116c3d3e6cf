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

#include "detcert/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "detcert/oracle.hpp"

namespace detcert::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw QueryFileError(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw QueryFileError(where + ": unknown field '" + key + "'");
  }
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw QueryFileError(where + ": missing field '" + key + "'");
  return *it;
}

double number(const json& v, const std::string& what) {
  if (!v.is_number()) throw QueryFileError(what + " must be a number");
  return v.get<double>();
}

std::int64_t integer(const json& v, const std::string& what) {
  if (!v.is_number_integer()) throw QueryFileError(what + " must be an integer");
  return v.get<std::int64_t>();
}

std::string text(const json& v, const std::string& what) {
  if (!v.is_string()) throw QueryFileError(what + " must be a string");
  return v.get<std::string>();
}

fs::path existing(const fs::path& base, const std::string& rel, const std::string& what) {
  const fs::path p = base / rel;
  if (!fs::exists(p)) throw QueryFileError(what + " not found: " + p.string());
  return p;
}

GroundTruth parse_ground_truth(const json& v, const std::string& where) {
  check_keys(v, {"box", "class_id"}, where);
  const json& box = require(v, "box", where);
  if (!box.is_array() || box.size() != 4) throw QueryFileError(where + ".box must be an array of 4 numbers");
  GroundTruth g;
  g.box = {number(box[0], where + ".box"), number(box[1], where + ".box"), number(box[2], where + ".box"),
           number(box[3], where + ".box")};
  g.class_id = static_cast<int>(integer(require(v, "class_id", where), where + ".class_id"));
  if (!g.box.valid()) throw QueryFileError(where + ".box must have z0 < z2 and z1 < z3");
  return g;
}

PerturbationSpec parse_perturbation(const json& v, const std::string& where) {
  check_keys(v, {"kind", "angle", "kernel_size"}, where);
  PerturbationSpec spec;
  try {
    spec.kind = perturbation_kind_from_string(text(require(v, "kind", where), where + ".kind"));
  } catch (const std::invalid_argument& e) {
    throw QueryFileError(where + ": " + e.what());
  }
  if (spec.kind == PerturbationKind::motionblur) {
    if (v.contains("angle")) spec.angle_deg = number(v["angle"], where + ".angle");
    if (v.contains("kernel_size")) spec.kernel_size = static_cast<int>(integer(v["kernel_size"], where + ".kernel_size"));
    try {
      motion_blur_kernel(spec.kernel_size, spec.angle_deg);
    } catch (const std::invalid_argument& e) {
      throw QueryFileError(where + ": " + e.what());
    }
  } else if (v.contains("angle") || v.contains("kernel_size")) {
    throw QueryFileError(where + ": angle and kernel_size apply to motionblur only");
  }
  return spec;
}

SolverOptions parse_solver(const json& v) {
  check_keys(v, {"bounding", "propagation", "max_depth", "timeout", "seed"}, "solver");
  SolverOptions s;
  try {
    if (v.contains("bounding")) s.bounding = bounding_method_from_string(text(v["bounding"], "solver.bounding"));
    if (v.contains("propagation")) {
      s.propagation = propagation_method_from_string(text(v["propagation"], "solver.propagation"));
    }
  } catch (const std::invalid_argument& e) {
    throw QueryFileError(std::string("solver: ") + e.what());
  }
  if (v.contains("max_depth")) {
    const auto d = integer(v["max_depth"], "solver.max_depth");
    if (d < 0) throw QueryFileError("solver.max_depth must be non-negative");
    s.max_depth = static_cast<int>(d);
  }
  if (v.contains("timeout")) {
    s.timeout_s = number(v["timeout"], "solver.timeout");
    if (!(s.timeout_s > 0)) throw QueryFileError("solver.timeout must be positive");
  }
  if (v.contains("seed")) {
    const auto seed = integer(v["seed"], "solver.seed");
    if (seed < 0) throw QueryFileError("solver.seed must be non-negative");
    s.seed = static_cast<std::uint64_t>(seed);
  }
  return s;
}

}  // namespace

QueryFile load_query_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw QueryFileError("cannot open query file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw QueryFileError("query file is not valid JSON: " + std::string(e.what()));
  }
  check_keys(doc,
             {"model", "image", "ground_truth", "images", "tau_iou", "tau_class", "perturbation", "perturbations",
              "budgets", "solver"},
             "query");
  const fs::path base = path.parent_path();
  QueryFile q;

  q.tau_iou = number(require(doc, "tau_iou", "query"), "tau_iou");
  q.tau_class = number(require(doc, "tau_class", "query"), "tau_class");
  if (!(q.tau_iou > 0 && q.tau_iou <= 1)) throw QueryFileError("tau_iou must lie in (0, 1]");
  if (!(q.tau_class > 0 && q.tau_class < 1)) throw QueryFileError("tau_class must lie in (0, 1)");

  const json& budgets = require(doc, "budgets", "query");
  if (!budgets.is_array() || budgets.empty()) throw QueryFileError("budgets must be a non-empty array");
  for (const json& b : budgets) {
    const double eps = number(b, "budgets entry");
    if (!(eps >= 0)) throw QueryFileError("budgets must be non-negative");
    q.budgets.push_back(eps);
  }

  if (doc.contains("perturbation") == doc.contains("perturbations")) {
    throw QueryFileError("exactly one of 'perturbation' and 'perturbations' is required");
  }
  if (doc.contains("perturbation")) {
    q.perturbations.push_back(parse_perturbation(doc["perturbation"], "perturbation"));
  } else {
    const json& list = doc["perturbations"];
    if (!list.is_array() || list.empty()) throw QueryFileError("perturbations must be a non-empty array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      q.perturbations.push_back(parse_perturbation(list[i], "perturbations[" + std::to_string(i) + "]"));
    }
  }

  if (doc.contains("solver")) q.solver = parse_solver(doc["solver"]);

  // Collect image entries before loading anything.
  std::vector<std::pair<std::string, GroundTruth>> entries;
  if (doc.contains("images")) {
    if (doc.contains("image") || doc.contains("ground_truth")) {
      throw QueryFileError("'images' cannot be combined with 'image' / 'ground_truth'");
    }
    const json& list = doc["images"];
    if (!list.is_array() || list.empty()) throw QueryFileError("images must be a non-empty array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string where = "images[" + std::to_string(i) + "]";
      check_keys(list[i], {"image", "ground_truth"}, where);
      entries.emplace_back(text(require(list[i], "image", where), where + ".image"),
                           parse_ground_truth(require(list[i], "ground_truth", where), where + ".ground_truth"));
    }
  } else {
    entries.emplace_back(text(require(doc, "image", "query"), "image"),
                         parse_ground_truth(require(doc, "ground_truth", "query"), "ground_truth"));
  }

  const fs::path model_path = existing(base, text(require(doc, "model", "query"), "model"), "model file");
  std::vector<fs::path> image_paths;
  for (const auto& [name, _] : entries) image_paths.push_back(existing(base, name, "image file"));

  q.model = std::make_shared<const ModelBundle>(load_model(model_path));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    q.images.push_back({entries[i].first, load_image(image_paths[i]), entries[i].second});
  }
  return q;
}

std::vector<QueryRow> expand_rows(const QueryFile& file) {
  std::vector<QueryRow> rows;
  for (const QueryImage& img : file.images) {
    for (const PerturbationSpec& p : file.perturbations) {
      for (double eps : file.budgets) {
        VerificationQuery q;
        q.model = file.model;
        q.image = img.image;
        q.ground_truth = img.ground_truth;
        q.tau_iou = file.tau_iou;
        q.tau_class = file.tau_class;
        q.perturbation = p;
        q.perturbation.epsilon = eps;
        q.max_depth = file.solver.max_depth;
        q.timeout_s = file.solver.timeout_s;
        q.bounding = file.solver.bounding;
        q.propagation = file.solver.propagation;
        rows.push_back({img.name, std::move(q)});
      }
    }
  }
  return rows;
}

TightnessInstance sample_tightness_instance(std::mt19937_64& rng, DecoderKind decoder, double width_min,
                                            double width_max) {
  auto uniform = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  TightnessInstance inst;
  inst.decoder = decoder;
  if (decoder == DecoderKind::ssd) {
    inst.anchor = {uniform(20, 300), uniform(20, 300), uniform(10, 150), uniform(10, 150), 1.0};
    inst.vars = {0.1, 0.2};
  } else {
    const double stride = std::array<double, 3>{8, 16, 32}[std::uniform_int_distribution<int>(0, 2)(rng)];
    inst.anchor = {std::floor(uniform(0, 13)), std::floor(uniform(0, 13)), uniform(0.5, 4), uniform(0.5, 4), stride};
  }
  Offsets nominal{};
  for (std::size_t k = 0; k < 4; ++k) {
    const double centre = uniform(-1, 1);
    const double w = width_min == width_max ? width_min : uniform(width_min, width_max);
    inst.offsets[k] = Interval(centre - w / 2, centre + w / 2);
    nominal[k] = uniform(centre - w, centre + w);
  }
  // Ground truth: the box decoded at a nearby offset, with each side jittered.
  const CornerBox base = h_map(decode(decoder, nominal, inst.anchor, inst.vars));
  const double bw = base.z2 - base.z0, bh = base.z3 - base.z1;
  CornerBox g{base.z0 + uniform(-0.15, 0.15) * bw, base.z1 + uniform(-0.15, 0.15) * bh,
              base.z2 + uniform(-0.15, 0.15) * bw, base.z3 + uniform(-0.15, 0.15) * bh};
  inst.ground_truth = {g, 0};
  return inst;
}

TightnessReport run_tightness(std::size_t n, std::uint64_t seed, double width_min, double width_max) {
  if (n == 0) throw std::invalid_argument("tightness needs at least one instance");
  if (!(width_min >= 0 && width_min <= width_max)) throw std::invalid_argument("need 0 <= width_min <= width_max");
  TightnessReport report;
  report.instances = n;
  const std::array<double, 11> edges{0.01, 0.10, 0.20, 0.30, 0.40, 0.50, 0.60, 0.70, 0.80, 0.90, 0.99};
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) report.buckets.push_back({edges[i], edges[i + 1]});
  report.below = {0.0, edges.front()};
  report.above = {edges.back(), 1.0};

  std::mt19937_64 rng(seed);
  const std::array<DecoderKind, 3> kinds{DecoderKind::ssd, DecoderKind::yolov2, DecoderKind::yolov3};
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const TightnessInstance inst = sample_tightness_instance(rng, kinds[i % 3], width_min, width_max);
    const IoUInterval opt = optimal_iou_bounds(
        offset_interval_to_region(inst.decoder, inst.offsets, inst.anchor, inst.vars), inst.ground_truth);
    const IoUInterval base = baseline_iou_bounds(
        offset_interval_to_corners(inst.decoder, inst.offsets, inst.anchor, inst.vars), inst.ground_truth);
    if (opt.lo < base.lo - 1e-9 || opt.hi > base.hi + 1e-9) ++report.dominance_violations;
    const double wb = base.width(), wo = opt.width();
    const double improvement = wb > 0 ? (wb - wo) / wb * 100.0 : 0.0;
    total += improvement;
    TightnessBucket* bucket = wb < edges.front() ? &report.below : wb >= edges.back() ? &report.above : nullptr;
    for (auto& b : report.buckets) {
      if (!bucket && wb >= b.lo && wb < b.hi) bucket = &b;
    }
    ++bucket->count;
    bucket->improvement_pct += improvement;  // summed here, averaged below
  }
  auto finish = [](TightnessBucket& b) {
    if (b.count) b.improvement_pct /= static_cast<double>(b.count);
  };
  for (auto& b : report.buckets) finish(b);
  finish(report.below);
  finish(report.above);
  report.mean_improvement_pct = total / static_cast<double>(n);
  return report;
}

namespace {

struct VerifyArgs {
  std::string query;
  std::string out;
  std::string csv;
  std::string branch_log;
  std::size_t workers = 1;
  std::optional<std::uint64_t> seed;
  std::optional<double> timeout;
  std::optional<int> max_depth;
  std::string bounding;
  std::string propagation;
  bool no_timing = false;
};

struct FalsifyArgs {
  std::string query;
  std::string out;
  std::string cex_dir;
  std::size_t n = 1000;
  std::optional<std::uint64_t> seed;
};

struct TightnessArgs {
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  double width_min = 0.0;
  double width_max = 0.6;
  std::string out;
};

QueryFile load_with_overrides(const std::string& path, const std::optional<std::uint64_t>& seed,
                              const std::optional<double>& timeout, const std::optional<int>& max_depth,
                              const std::string& bounding, const std::string& propagation) {
  QueryFile file = load_query_file(path);
  if (seed) file.solver.seed = *seed;
  if (timeout) file.solver.timeout_s = *timeout;
  if (max_depth) file.solver.max_depth = *max_depth;
  if (!bounding.empty()) file.solver.bounding = bounding_method_from_string(bounding);
  if (!propagation.empty()) file.solver.propagation = propagation_method_from_string(propagation);
  return file;
}

void validate_rows(const std::vector<QueryRow>& rows) {
  for (const QueryRow& row : rows) {
    try {
      validate_query(row.query);
    } catch (const QueryRejected& e) {
      throw QueryRejected(row.image + " (" + std::string(to_string(row.query.perturbation.kind)) +
                          ", eps=" + std::to_string(row.query.perturbation.epsilon) + "): " + e.what());
    }
  }
}

json angle_field(const PerturbationSpec& p) {
  return p.kind == PerturbationKind::motionblur ? json(p.angle_deg) : json(nullptr);
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << body;
}

std::string csv_row(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  return line + '\n';
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err) {
  const QueryFile file =
      load_with_overrides(args.query, args.seed, args.timeout, args.max_depth, args.bounding, args.propagation);
  const std::vector<QueryRow> rows = expand_rows(file);
  validate_rows(rows);

  std::vector<Verdict> verdicts(rows.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) verdicts[i] = verify(rows[i].query);
  };
  const std::size_t n_workers = std::clamp<std::size_t>(args.workers, 1, rows.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  ordered_json report = ordered_json::array();
  ordered_json branch_log = ordered_json::array();
  std::string csv = csv_row({"image", "perturbation", "angle", "epsilon", "verdict", "wall_time_s", "branches",
                             "max_depth_reached", "bounding", "propagation", "timed_out", "counterexample_t",
                             "violation", "engine_version", "schema_version", "seed"});
  std::ostream& summary = args.out.empty() ? err : out;
  int exit_code = kExitRobust;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const VerificationQuery& q = rows[i].query;
    const Verdict& v = verdicts[i];
    ordered_json row;
    row["image"] = rows[i].image;
    row["perturbation"] = to_string(q.perturbation.kind);
    row["angle"] = angle_field(q.perturbation);
    row["epsilon"] = q.perturbation.epsilon;
    row["verdict"] = to_string(v.status);
    if (!args.no_timing) row["wall_time_s"] = v.wall_time_s;
    row["branches"] = v.branches_explored;
    row["max_depth_reached"] = v.max_depth_reached;
    row["bounding"] = to_string(q.bounding);
    row["propagation"] = to_string(q.propagation);
    row["timed_out"] = v.timed_out;
    if (v.counterexample) {
      row["counterexample"] = {{"t", v.counterexample->t},
                               {"violation", to_string(v.counterexample->violation)},
                               {"branch", v.counterexample->branch_path}};
    } else {
      row["counterexample"] = nullptr;
    }
    row["engine_version"] = kEngineVersion;
    row["schema_version"] = kReportSchemaVersion;
    row["seed"] = file.solver.seed;
    report.push_back(row);

    csv += csv_row({rows[i].image, std::string(to_string(q.perturbation.kind)),
                    q.perturbation.kind == PerturbationKind::motionblur ? fmt(q.perturbation.angle_deg) : "",
                    fmt(q.perturbation.epsilon), std::string(to_string(v.status)),
                    args.no_timing ? "" : fmt(v.wall_time_s), std::to_string(v.branches_explored),
                    std::to_string(v.max_depth_reached), std::string(to_string(q.bounding)),
                    std::string(to_string(q.propagation)), v.timed_out ? "true" : "false",
                    v.counterexample ? fmt(v.counterexample->t) : "",
                    v.counterexample ? std::string(to_string(v.counterexample->violation)) : "", kEngineVersion,
                    std::to_string(kReportSchemaVersion), std::to_string(file.solver.seed)});

    for (const BranchRecord& b : v.branches) {
      branch_log.push_back(ordered_json{{"row", i},
                                        {"path", b.path},
                                        {"depth", b.depth},
                                        {"t_lo", b.t_range.lo()},
                                        {"t_hi", b.t_range.hi()},
                                        {"status", to_string(b.status)},
                                        {"candidates", b.candidates},
                                        {"propagation_s", b.propagation_s},
                                        {"bounding_s", b.bounding_s}});
    }

    summary << rows[i].image << "  " << to_string(q.perturbation.kind);
    if (q.perturbation.kind == PerturbationKind::motionblur) summary << '@' << q.perturbation.angle_deg;
    summary << "  eps=" << q.perturbation.epsilon << "  " << to_string(v.status) << "  branches=" << v.branches_explored
            << "  depth=" << v.max_depth_reached << "  time=" << std::fixed << std::setprecision(3) << v.wall_time_s
            << 's' << std::defaultfloat << std::setprecision(6);
    if (v.timed_out) summary << "  (timeout)";
    if (v.counterexample) summary << "  cex t=" << v.counterexample->t << " (" << to_string(v.counterexample->violation) << ')';
    summary << '\n';

    if (v.status == Status::nonrobust) exit_code = kExitNonRobust;
  }
  // UNKNOWN outranks NONROBUST: the batch is not fully decided.
  if (std::any_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.status == Status::unknown; })) {
    exit_code = kExitUnknown;
  }

  const std::string body = report.dump(2) + "\n";
  if (args.out.empty()) {
    out << body;
  } else {
    write_text(args.out, body);
  }
  if (!args.csv.empty()) write_text(args.csv, csv);
  if (!args.branch_log.empty()) write_text(args.branch_log, branch_log.dump(2) + "\n");
  return exit_code;
}

int cmd_falsify(const FalsifyArgs& args, std::ostream& out, std::ostream& err) {
  const QueryFile file = load_with_overrides(args.query, args.seed, std::nullopt, std::nullopt, "", "");
  const std::vector<QueryRow> rows = expand_rows(file);
  validate_rows(rows);

  const fs::path cex_dir = !args.cex_dir.empty()           ? fs::path(args.cex_dir)
                           : !args.out.empty()             ? fs::path(args.out).parent_path()
                                                           : fs::current_path();
  ordered_json report = ordered_json::array();
  std::ostream& summary = args.out.empty() ? err : out;
  bool found_any = false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const VerificationQuery& q = rows[i].query;
    const auto cex = oracle::falsify(q, args.n, file.solver.seed);
    ordered_json row;
    row["image"] = rows[i].image;
    row["perturbation"] = to_string(q.perturbation.kind);
    row["angle"] = angle_field(q.perturbation);
    row["epsilon"] = q.perturbation.epsilon;
    row["samples"] = args.n;
    row["found"] = cex.has_value();
    if (cex) {
      found_any = true;
      if (!cex_dir.empty()) fs::create_directories(cex_dir);
      const fs::path image_path = cex_dir / ("counterexample_" + std::to_string(i) + ".json");
      save_image_json(cex->image, image_path);
      row["counterexample"] = {{"t", cex->t}, {"violation", to_string(cex->violation)}, {"image", image_path.string()}};
    } else {
      row["counterexample"] = nullptr;
    }
    row["engine_version"] = kEngineVersion;
    row["schema_version"] = kReportSchemaVersion;
    row["seed"] = file.solver.seed;
    report.push_back(row);

    summary << rows[i].image << "  " << to_string(q.perturbation.kind) << "  eps=" << q.perturbation.epsilon << "  ";
    if (cex) {
      summary << "counterexample t=" << cex->t << " (" << to_string(cex->violation) << ")\n";
    } else {
      summary << "none in " << args.n << " samples\n";
    }
  }
  const std::string body = report.dump(2) + "\n";
  if (args.out.empty()) {
    out << body;
  } else {
    write_text(args.out, body);
  }
  return found_any ? 1 : 0;
}

int cmd_tightness(const TightnessArgs& args, std::ostream& out, std::ostream& err) {
  const TightnessReport r = run_tightness(args.n, args.seed, args.width_min, args.width_max);
  std::ostream& summary = args.out.empty() ? err : out;
  auto label = [](const TightnessBucket& b) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << b.lo << " - " << b.hi;
    return s.str();
  };
  summary << std::left << std::setw(14) << "range" << std::setw(10) << "count" << "improvement %\n";
  auto line = [&](const TightnessBucket& b) {
    summary << std::left << std::setw(14) << label(b) << std::setw(10) << b.count << std::fixed << std::setprecision(2)
            << b.improvement_pct << std::defaultfloat << '\n';
  };
  for (const auto& b : r.buckets) line(b);
  summary << "outside the table: " << r.below.count << " below 0.01, " << r.above.count << " at or above 0.99\n";
  summary << "instances: " << r.instances << "  mean improvement: " << std::fixed << std::setprecision(2)
          << r.mean_improvement_pct << "%  dominance violations: " << r.dominance_violations << std::defaultfloat
          << '\n';

  auto bucket_json = [&](const TightnessBucket& b) {
    return ordered_json{{"range", label(b)}, {"lo", b.lo}, {"hi", b.hi}, {"count", b.count},
                        {"improvement_pct", b.improvement_pct}};
  };
  ordered_json doc;
  doc["instances"] = r.instances;
  doc["seed"] = args.seed;
  doc["width_min"] = args.width_min;
  doc["width_max"] = args.width_max;
  doc["dominance_violations"] = r.dominance_violations;
  doc["mean_improvement_pct"] = r.mean_improvement_pct;
  doc["buckets"] = ordered_json::array();
  for (const auto& b : r.buckets) doc["buckets"].push_back(bucket_json(b));
  doc["below"] = bucket_json(r.below);
  doc["above"] = bucket_json(r.above);
  doc["engine_version"] = kEngineVersion;
  doc["schema_version"] = kReportSchemaVersion;
  const std::string body = doc.dump(2) + "\n";
  if (args.out.empty()) {
    out << body;
  } else {
    write_text(args.out, body);
  }
  return r.dominance_violations == 0 ? 0 : 1;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robustness verification for single-object detectors"};
  app.require_subcommand(1);
  const std::vector<std::string> bounding_names{"optimal", "baseline"};
  const std::vector<std::string> propagation_names{"ibp", "backsub"};

  VerifyArgs va;
  auto* verify_cmd = app.add_subcommand("verify", "Verify every (image, perturbation, budget) row of a query file");
  verify_cmd->add_option("--query", va.query, "Query file")->required();
  verify_cmd->add_option("--out", va.out, "JSON report path (default: stdout)");
  verify_cmd->add_option("--csv", va.csv, "Also write the report as CSV");
  verify_cmd->add_option("--branch-log", va.branch_log, "Write per-branch timings as JSON");
  verify_cmd->add_option("--workers", va.workers, "Rows verified in parallel")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--seed", va.seed, "Override solver.seed");
  verify_cmd->add_option("--timeout", va.timeout, "Per-row timeout in seconds")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--max-depth", va.max_depth, "Maximum bisection depth")->check(CLI::NonNegativeNumber);
  verify_cmd->add_option("--bounding", va.bounding, "IoU bounding method")->check(CLI::IsMember(bounding_names));
  verify_cmd->add_option("--propagation", va.propagation, "Bound propagation method")
      ->check(CLI::IsMember(propagation_names));
  verify_cmd->add_flag("--no-timing", va.no_timing, "Leave wall times out of the report");

  FalsifyArgs fa;
  auto* falsify_cmd = app.add_subcommand("falsify", "Search each row for a concrete counterexample by sampling");
  falsify_cmd->add_option("--query", fa.query, "Query file")->required();
  falsify_cmd->add_option("--n", fa.n, "Samples per row, endpoints included")->check(CLI::PositiveNumber);
  falsify_cmd->add_option("--seed", fa.seed, "Override solver.seed");
  falsify_cmd->add_option("--out", fa.out, "JSON report path (default: stdout)");
  falsify_cmd->add_option("--cex-dir", fa.cex_dir, "Directory for counterexample images");

  TightnessArgs ta;
  auto* tight_cmd = app.add_subcommand("tightness", "Compare optimal and baseline IoU bounds on random instances");
  tight_cmd->add_option("--n", ta.n, "Number of instances")->check(CLI::PositiveNumber);
  tight_cmd->add_option("--seed", ta.seed, "Random seed");
  tight_cmd->add_option("--width-min", ta.width_min, "Smallest offset interval width")->check(CLI::NonNegativeNumber);
  tight_cmd->add_option("--width-max", ta.width_max, "Largest offset interval width")->check(CLI::NonNegativeNumber);
  tight_cmd->add_option("--out", ta.out, "JSON report path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (*verify_cmd) return cmd_verify(va, out, err);
    if (*falsify_cmd) return cmd_falsify(fa, out, err);
    return cmd_tightness(ta, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace detcert::cli
