// Acceptance suite: one pass/fail line per criterion, tolerances pinned in
// code. Criterion 9 is dataset-conditional and reports SKIPPED when the study
// export is not present (see README: acceptance data hooks).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "comfort/csv.hpp"
#include "comfort/eval.hpp"
#include "comfort/fusion.hpp"
#include "comfort/ingest.hpp"
#include "comfort/metrics.hpp"
#include "comfort/rng.hpp"
#include "comfort/sha256.hpp"
#include "comfort/synth.hpp"
#include "comfort/tendency.hpp"
#include "helpers.hpp"

using namespace comfort;
using nlohmann::json;
using testutil::TempDir;

namespace {

const std::string kCli = COMFORT_CLI_PATH;

void report(const std::string& criterion, bool pass, const std::string& detail) {
    std::printf("ACCEPTANCE %s: %s (%s)\n", criterion.c_str(), pass ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
}

double elapsed_s(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<FusedRecord> fuse_sim(const SimResult& sim) {
    return fuse_dataset(sim.votes, sim.fixes, sim.readings, sim.wearables, sim.zones, {}).first;
}

EvalOptions opts_with(int trees, std::uint64_t seed, int threads) {
    EvalOptions opts;
    opts.forest.n_trees = trees;
    opts.forest.master_seed = seed;
    opts.tz = parse_timezone("Asia/Singapore");
    opts.threads = threads;
    return opts;
}

int run_cli(const std::string& args) { return testutil::run_command(kCli + " " + args).exit_code; }

}  // namespace

TEST_CASE("C1 f1-micro identity with accuracy") {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(20240601);
    std::size_t trials = 0, exact = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng.below(500);
        std::vector<int> y_true(n), y_pred(n);
        std::size_t correct = 0;
        for (std::size_t i = 0; i < n; ++i) {
            y_true[i] = static_cast<int>(rng.below(3));
            y_pred[i] = static_cast<int>(rng.below(3));
            correct += y_true[i] == y_pred[i];
        }
        const double accuracy = static_cast<double>(correct) / static_cast<double>(n);
        const double f1 = f1_micro(y_true, y_pred, 3);
        ++trials;
        exact += f1 == accuracy;  // bitwise
    }
    const double secs = elapsed_s(start);
    const bool pass = exact == trials && secs < 5.0;
    report("C1 f1-identity", pass,
           std::to_string(exact) + "/" + std::to_string(trials) + " bitwise-equal, " +
               std::to_string(secs) + " s");
    CHECK(pass);
}

TEST_CASE("C2 forest oracle on synthetic rules") {
    const auto start = std::chrono::steady_clock::now();
    const auto spec = *find_feature_set("FS1");
    const EvalOptions opts = opts_with(200, 7, 1);  // single core

    const auto run = [&](double noise) {
        SimConfig cfg;
        cfg.n_occupants = 10;
        cfg.n_zones = 5;
        cfg.days = 42;
        cfg.votes_per_day_min = 10;
        cfg.votes_per_day_max = 14;
        cfg.archetype_mix = {{Archetype{"shared", 0, 0, 0, noise}, 1.0}};
        cfg.seed = 1001;
        const SimResult sim = simulate(cfg);
        const auto records = fuse_sim(sim);
        const SplitPlan split = temporal_split(records);
        std::map<Dimension, double> f1;
        for (const Dimension dim : {Dimension::Thermal, Dimension::Light, Dimension::Noise})
            f1[dim] = eval_grouped(records, split, spec, dim, opts).f1;
        return std::pair(records.size(), f1);
    };

    const auto [rows0, clean] = run(0.0);
    const auto [rows1, noisy] = run(0.1);

    bool pass = rows0 >= 4000;  // study-order scale (~5,000 rows)
    std::string detail = "rows=" + std::to_string(rows0) + " clean F1";
    for (const auto& [dim, f1] : clean) {
        pass = pass && f1 >= 0.98;
        detail += " " + std::string(dimension_name(dim)) + "=" + std::to_string(f1);
    }
    detail += "; noisy F1";
    for (const auto& [dim, f1] : noisy) {
        pass = pass && f1 >= 0.85 && f1 <= 0.95;
        detail += " " + std::string(dimension_name(dim)) + "=" + std::to_string(f1);
    }
    const double secs = elapsed_s(start);
    pass = pass && secs < 120.0;
    detail += "; " + std::to_string(secs) + " s single-core";
    report("C2 forest-oracle", pass, detail);
    CHECK(pass);
}

TEST_CASE("C3 clustering recovery and the 9-to-8 merge") {
    SimConfig cfg;
    cfg.n_occupants = 30;
    cfg.n_zones = 5;
    cfg.days = 14;
    cfg.votes_per_day_min = 8;
    cfg.votes_per_day_max = 14;
    cfg.archetype_mix = {{Archetype{"cool-seeker", -5, -300, -10, 0.02}, 1.0},
                         {Archetype{"neutral", 0, 0, 0, 0.02}, 1.0},
                         {Archetype{"warm-seeker", 5, 300, 10, 0.02}, 1.0}};
    // Identical zone environments: occupants' vote-ratio profiles then differ
    // only through their archetype, which is what "well-separated" plants.
    // (Mixed environments shift profiles by home-zone exposure instead.)
    cfg.zone_schedules.assign(5, ZoneSchedule{24.0, 5.0, 15.0, 800, 40, 36, 3, 26});
    cfg.seed = 4242;
    const SimResult sim = simulate(cfg);
    const auto records = fuse_sim(sim);
    const auto vectors = vote_ratios(records, SubjectKind::Occupant);

    const ClusterModel recovery = kmeans_fit(vectors, 3, 99);
    std::map<std::string, int> archetype_ids;
    std::vector<int> truth, predicted;
    for (const auto& tv : vectors) {
        const auto& name = sim.truth.occupant_archetype.at(tv.subject_id);
        truth.push_back(
            static_cast<int>(archetype_ids.emplace(name, archetype_ids.size()).first->second));
        predicted.push_back(recovery.assignments.at(tv.subject_id));
    }
    const double ari = adjusted_rand_index(truth, predicted);

    // Independent oracle: perfect recovery means some permutation of the 3
    // cluster ids reproduces the planted labels exactly.
    bool permutation_match = false;
    std::array<int, 3> perm{0, 1, 2};
    do {
        bool all = true;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            if (perm[static_cast<std::size_t>(predicted[i])] != truth[i]) {
                all = false;
                break;
            }
        }
        permutation_match = permutation_match || all;
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(permutation_match == (ari == 1.0));

    const ClusterModel merge = kmeans_fit(vectors, 9, 99);
    const bool merge_ok =
        merge.k == 8 && merge.dropped_classes == std::vector<std::string>{"prefer_louder"};

    const bool pass = ari >= 0.9 && merge_ok;
    report("C3 clustering-recovery", pass,
           "ARI=" + std::to_string(ari) + ", k(9 requested)=" + std::to_string(merge.k) +
               ", dropped=" +
               (merge.dropped_classes.empty() ? "none" : merge.dropped_classes.front()));
    CHECK(pass);
}

TEST_CASE("C4 grouped beats individual across seeds") {
    const auto spec = *find_feature_set("FS1");
    std::map<Dimension, int> wins;
    const int seeds = 20;
    for (int seed = 0; seed < seeds; ++seed) {
        SimConfig cfg;
        cfg.n_occupants = 8;
        cfg.n_zones = 4;
        cfg.days = 10;
        cfg.votes_per_day_min = 5;
        cfg.votes_per_day_max = 9;
        cfg.archetype_mix = {{Archetype{"shared", 0, 0, 0, 0.08}, 1.0}};
        cfg.seed = 9000 + static_cast<std::uint64_t>(seed);
        const SimResult sim = simulate(cfg);
        const auto records = fuse_sim(sim);
        const SplitPlan split = temporal_split(records);
        const EvalOptions opts = opts_with(64, 5000 + static_cast<std::uint64_t>(seed), 2);
        for (const Dimension dim : {Dimension::Thermal, Dimension::Light, Dimension::Noise}) {
            const double grouped = eval_grouped(records, split, spec, dim, opts).f1;
            const double individual = eval_individual(records, split, spec, dim, opts).f1;
            if (grouped >= individual) ++wins[dim];
        }
    }
    bool pass = true;
    std::string detail;
    for (const auto& [dim, count] : wins) {
        pass = pass && count >= 16;
        detail += std::string(dimension_name(dim)) + "=" + std::to_string(count) + "/20 ";
    }
    report("C4 grouped-vs-individual", pass, detail + "(need >= 16/20 per dimension)");
    CHECK(pass);
}

TEST_CASE("C5 cold-start convergence and grouped exactness") {
    SimConfig cfg;
    cfg.n_occupants = 12;
    cfg.n_zones = 4;
    cfg.days = 12;
    cfg.votes_per_day_min = 4;
    cfg.votes_per_day_max = 8;
    cfg.archetype_mix = {{Archetype{"shared", 0, 0, 0, 0.05}, 1.0}};
    cfg.seed = 777;
    const SimResult sim = simulate(cfg);
    const auto records = fuse_sim(sim);
    const SplitPlan split = temporal_split(records);
    const auto spec = *find_feature_set("FS4");
    const EvalOptions opts = opts_with(48, 31, 2);

    const auto curves = coldstart_curves(records, split, spec, Dimension::Thermal, opts,
                                         /*R=*/5, /*seed=*/2025);
    const EvalReport grouped = eval_grouped(records, split, spec, Dimension::Thermal, opts);

    const int n = static_cast<int>(split.occupant_count());
    bool converged_all = true, exact_all = true;
    for (const auto& curve : curves) {
        bool converged = false;
        for (const auto& point : curve.points) {
            if (point.k <= 10 && point.f1_excluded >= point.f1_included - 0.05) {
                converged = true;
                break;
            }
        }
        converged_all = converged_all && converged;
        const auto& last = curve.points.back();
        const bool exact = last.k == n - 1 &&
                           last.f1_included == grouped.per_occupant.at(curve.occupant_id).f1;
        exact_all = exact_all && exact;
    }
    const bool pass = converged_all && exact_all && curves.size() == split.occupant_count();
    report("C5 coldstart-convergence", pass,
           std::to_string(curves.size()) + " occupants, converge<=k10=" +
               (converged_all ? "all" : "NOT all") +
               ", k=N-1 exact=" + (exact_all ? "all" : "NOT all"));
    CHECK(pass);
}

TEST_CASE("C6 leakage audit: perturbing test labels leaves models byte-identical") {
    TempDir dir("acc_c6");
    const auto out1 = (dir.path() / "run1").string();
    const auto out2 = (dir.path() / "run2").string();
    const std::string common = " --seed 17 --threads 2";
    const std::string sim_args = " simulate --occupants 8 --days 6";

    REQUIRE(run_cli("--out " + out1 + common + sim_args) == 0);
    REQUIRE(run_cli("--out " + out1 + common + " ingest") == 0);
    REQUIRE(run_cli("--out " + out1 + common + " fuse") == 0);
    REQUIRE(run_cli("--out " + out1 + common + " featurize") == 0);
    REQUIRE(run_cli("--out " + out1 + common + " train --trees 60") == 0);

    // Collect the test-period vote ids from the split plan.
    const json split = json::parse(read_text_file(dir.path() / "run1" / "split_plan.json"));
    std::set<std::string> test_ids;
    for (const auto& [_, occ] : split.at("by_occupant").items())
        for (const auto& id : occ.at("test_ids")) test_ids.insert(id.get<std::string>());
    REQUIRE_FALSE(test_ids.empty());

    // Second run: same raw data except every test-period label is rotated.
    std::filesystem::create_directories(out2);
    std::filesystem::copy(dir.path() / "run1" / "raw", std::filesystem::path(out2) / "raw",
                          std::filesystem::copy_options::recursive);
    const auto votes_path = std::filesystem::path(out2) / "raw" / "votes.csv";
    const CsvFile votes = read_csv(votes_path);
    {
        CsvWriter w(votes_path);
        w.row(votes.header);
        for (const CsvRow& row : votes.rows) {
            auto fields = row.fields;
            if (test_ids.count(fields[0])) {
                for (const std::size_t col : {std::size_t{3}, std::size_t{4}, std::size_t{5}}) {
                    const Dimension dim = col == 3   ? Dimension::Thermal
                                          : col == 4 ? Dimension::Light
                                                     : Dimension::Noise;
                    const int cls = *parse_class(dim, fields[col]);
                    fields[col] = std::string(class_label(dim, (cls + 1) % 3));
                }
            }
            w.row(fields);
        }
    }
    REQUIRE(run_cli("--out " + out2 + common + " ingest") == 0);
    REQUIRE(run_cli("--out " + out2 + common + " fuse") == 0);
    REQUIRE(run_cli("--out " + out2 + common + " featurize") == 0);
    REQUIRE(run_cli("--out " + out2 + common + " train --trees 60") == 0);

    // The perturbation must have changed the data...
    const bool data_differs = sha256_file_hex(dir.path() / "run1" / "fused.csv") !=
                              sha256_file_hex(std::filesystem::path(out2) / "fused.csv");
    // ...but not one byte of any trained model.
    bool models_identical = true;
    std::size_t model_count = 0;
    for (const auto& entry :
         std::filesystem::directory_iterator(dir.path() / "run1" / "models")) {
        ++model_count;
        const auto other = std::filesystem::path(out2) / "models" / entry.path().filename();
        models_identical = models_identical && std::filesystem::exists(other) &&
                           sha256_file_hex(entry.path()) == sha256_file_hex(other);
    }
    const bool pass = data_differs && models_identical && model_count == 6;
    report("C6 leakage-audit", pass,
           std::to_string(model_count) + " models byte-identical=" +
               (models_identical ? "yes" : "NO") +
               ", perturbation changed data=" + (data_differs ? "yes" : "NO"));
    CHECK(pass);
}

TEST_CASE("C7 determinism: identical pipeline runs, identical manifests") {
    TempDir dir("acc_c7");
    const json config{{"seed", 23},
                      {"threads", 2},
                      {"forest", {{"n_trees", 40}}},
                      {"features", {{"sets", {"FS4"}}}},
                      {"eval", {{"dimensions", {"thermal"}}}},
                      {"coldstart", {{"enabled", true}, {"R", 2}, {"max_k", 3}}},
                      {"simulate", {{"occupants", 6}, {"days", 4}, {"zones", 3}}}};

    std::string manifests[2];
    for (int run = 0; run < 2; ++run) {
        const auto out = (dir.path() / ("run" + std::to_string(run))).string();
        json run_config = config;
        run_config["out"] = out;
        const auto config_path = dir.path() / ("config" + std::to_string(run) + ".json");
        std::ofstream(config_path) << run_config.dump(2);
        REQUIRE(run_cli("--config " + config_path.string() + " pipeline --synth") == 0);
        manifests[run] = sha256_file_hex(std::filesystem::path(out) / "manifest.json");
    }
    const bool pass = manifests[0] == manifests[1];
    report("C7 determinism", pass, "manifest sha256 " + manifests[0].substr(0, 12) + "... vs " +
                                       manifests[1].substr(0, 12) + "...");
    CHECK(pass);
}

TEST_CASE("C8 zone forecast marks unsupported night hours") {
    SimConfig cfg;  // default voting window is 08:00-20:00
    cfg.n_occupants = 10;
    cfg.n_zones = 3;
    cfg.days = 14;
    cfg.seed = 55;
    const SimResult sim = simulate(cfg);
    const auto records = fuse_sim(sim);
    const EvalOptions opts = opts_with(40, 3, 2);

    std::size_t night_points = 0, flagged = 0;
    for (const auto& zone : {"zone-01", "zone-02", "zone-03"}) {
        for (const Dimension dim : {Dimension::Thermal, Dimension::Light, Dimension::Noise}) {
            const Forecast forecast = zone_forecast(records, zone, dim, opts, 30);
            for (const auto& point : forecast.points) {
                if (point.hour_local >= 22.0 || point.hour_local < 7.0) {
                    ++night_points;
                    if (point.support == 0 && point.low_confidence) ++flagged;
                }
            }
        }
    }
    const bool pass = night_points > 0 && flagged == night_points;
    report("C8 forecast-support-flags", pass,
           std::to_string(flagged) + "/" + std::to_string(night_points) +
               " night grid points flagged low-confidence");
    CHECK(pass);
}

TEST_CASE("C9 study-data reproduction (conditional)") {
    // Looks for the canonical-format export of the original study data; the
    // published segments are not bundled, so this normally reports SKIPPED.
    std::filesystem::path data_dir;
    if (const char* env = std::getenv("COMFORT_STUDY_DATA")) data_dir = env;
    if (data_dir.empty()) data_dir = "data/study";
    const bool present = std::filesystem::exists(data_dir / "votes.csv") &&
                         std::filesystem::exists(data_dir / "sensors.csv") &&
                         std::filesystem::exists(data_dir / "localization.csv") &&
                         std::filesystem::exists(data_dir / "wearable.csv") &&
                         std::filesystem::exists(data_dir / "zones.geojson");
    if (!present) {
        std::printf(
            "ACCEPTANCE C9 study-data: SKIPPED (no study export at %s; set "
            "COMFORT_STUDY_DATA)\n",
            data_dir.string().c_str());
        return;
    }

    const auto votes = load_votes(data_dir / "votes.csv", FileFormat::Csv);
    const auto readings = load_sensor_readings(data_dir / "sensors.csv", FileFormat::Csv);
    const auto fixes = load_localization(data_dir / "localization.csv", FileFormat::Csv);
    const auto wearables = load_wearable(data_dir / "wearable.csv", FileFormat::Csv);
    const ZoneMap zones = load_zone_map(data_dir / "zones.geojson");
    const auto [records, stats] =
        fuse_dataset(votes.records, fixes.records, readings.records, wearables.records, zones,
                     FusionConfig{});

    const bool votes_ok = votes.records.size() == 4378;
    const bool fused_ok = stats.env_matched >= 1445 && stats.env_matched <= 1503;  // 1474 +-2%

    const SplitPlan split = temporal_split(records);
    const EvalOptions opts = opts_with(1000, 0, 0);
    const std::map<Dimension, double> expected{{Dimension::Thermal, 0.64},
                                               {Dimension::Light, 0.80},
                                               {Dimension::Noise, 0.86}};
    bool f1_ok = true;
    std::string f1_detail;
    for (const auto& [dim, target] : expected) {
        double best = 0;
        for (const char* name : {"FS4", "FS6"}) {
            const auto spec = *find_feature_set(name);
            best = std::max(best, eval_grouped(records, split, spec, dim, opts).f1);
        }
        f1_ok = f1_ok && std::abs(best - target) <= 0.05;
        f1_detail += std::string(dimension_name(dim)) + "=" + std::to_string(best) + " ";
    }
    const bool pass = votes_ok && fused_ok && f1_ok;
    report("C9 study-data", pass,
           "votes=" + std::to_string(votes.records.size()) +
               ", env_matched=" + std::to_string(stats.env_matched) + ", best F1 " + f1_detail);
    CHECK(pass);
}

TEST_CASE("C10 end-to-end runtime budget") {
    TempDir dir("acc_c10");
    const auto start = std::chrono::steady_clock::now();
    const int exit_code =
        run_cli("--out " + (dir.path() / "run").string() +
                " --seed 99 --threads 1 pipeline --synth --occupants 30 --days 14 --trees 200");
    const double secs = elapsed_s(start);
    const bool pass = exit_code == 0 && secs < 60.0;
    report("C10 runtime", pass,
           "exit=" + std::to_string(exit_code) + ", " + std::to_string(secs) +
               " s on one core (budget 60 s)");
    CHECK(pass);
}
