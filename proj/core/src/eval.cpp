#include "comfort/eval.hpp"

#include <algorithm>
#include <unordered_set>

#include <json.hpp>

#include "comfort/csv.hpp"
#include "comfort/errors.hpp"
#include "comfort/rng.hpp"

namespace comfort {

namespace {

std::vector<std::string> dimension_class_labels(Dimension dim) {
    std::vector<std::string> labels;
    for (const auto label : kClassLabels[static_cast<std::size_t>(dim)])
        labels.emplace_back(label);
    return labels;
}

// Filters `records` (keeping canonical order) to votes in `ids`.
std::vector<FusedRecord> select_records(std::span<const FusedRecord> records,
                                        const std::unordered_set<std::string>& ids) {
    std::vector<FusedRecord> out;
    out.reserve(ids.size());
    for (const FusedRecord& rec : records) {
        if (ids.count(rec.vote.vote_id)) out.push_back(rec);
    }
    return out;
}

std::unordered_set<std::string> train_id_set(const SplitPlan& split) {
    std::unordered_set<std::string> ids;
    for (const auto& [_, s] : split.by_occupant)
        ids.insert(s.train_ids.begin(), s.train_ids.end());
    return ids;
}

std::unordered_set<std::string> test_id_set(const SplitPlan& split) {
    std::unordered_set<std::string> ids;
    for (const auto& [_, s] : split.by_occupant)
        ids.insert(s.test_ids.begin(), s.test_ids.end());
    return ids;
}

void fill_report_metrics(EvalReport& report) {
    report.f1 = f1_micro(report.confusion);
    report.per_class = per_class_metrics(report.confusion);
}

}  // namespace

bool SplitPlan::is_train(const std::string& occupant_id, const std::string& vote_id) const {
    const auto it = by_occupant.find(occupant_id);
    if (it == by_occupant.end()) return false;
    return std::find(it->second.train_ids.begin(), it->second.train_ids.end(), vote_id) !=
           it->second.train_ids.end();
}

SplitPlan temporal_split(std::span<const FusedRecord> records, int min_votes) {
    std::map<std::string, std::vector<const FusedRecord*>> by_occupant;
    for (const FusedRecord& rec : records) by_occupant[rec.vote.occupant_id].push_back(&rec);

    SplitPlan plan;
    for (auto& [occupant, recs] : by_occupant) {
        std::sort(recs.begin(), recs.end(), [](const FusedRecord* a, const FusedRecord* b) {
            return std::tie(a->vote.timestamp, a->vote.vote_id) <
                   std::tie(b->vote.timestamp, b->vote.vote_id);
        });
        const std::size_t n = recs.size();
        if (n < static_cast<std::size_t>(min_votes)) {
            plan.excluded_occupants.push_back(occupant);
            continue;
        }
        const std::size_t train_n = (3 * n + 4) / 5;  // ceil(0.6 n)
        SplitPlan::OccupantSplit split;
        for (std::size_t i = 0; i < n; ++i) {
            (i < train_n ? split.train_ids : split.test_ids).push_back(recs[i]->vote.vote_id);
        }
        plan.by_occupant.emplace(occupant, std::move(split));
    }
    return plan;
}

std::string split_plan_to_json(const SplitPlan& plan) {
    nlohmann::json occupants = nlohmann::json::object();
    for (const auto& [occupant, split] : plan.by_occupant) {
        occupants[occupant] = {{"train_ids", split.train_ids}, {"test_ids", split.test_ids}};
    }
    nlohmann::json j{{"by_occupant", occupants},
                     {"excluded_occupants", plan.excluded_occupants}};
    return j.dump(2) + "\n";
}

namespace {

struct SplitRecords {
    std::vector<FusedRecord> train;
    std::vector<FusedRecord> test;
};

SplitRecords split_records(std::span<const FusedRecord> records, const SplitPlan& split) {
    return {select_records(records, train_id_set(split)),
            select_records(records, test_id_set(split))};
}

}  // namespace

RandomForestModel train_grouped(std::span<const FusedRecord> records, const SplitPlan& split,
                                const FeatureSetSpec& spec, Dimension dimension,
                                const EvalOptions& opts) {
    const SplitRecords parts = split_records(records, split);
    const ProfileEncoder encoder(opts.leaky_profiles ? records
                                                     : std::span<const FusedRecord>(parts.train));
    auto [train_matrix, _] =
        build_matrix_with_encoder(parts.train, spec, dimension, encoder, opts.tz, opts.build);
    return fit_forest(train_matrix, opts.forest, opts.threads);
}

EvalReport eval_grouped(std::span<const FusedRecord> records, const SplitPlan& split,
                        const FeatureSetSpec& spec, Dimension dimension,
                        const EvalOptions& opts, const RandomForestModel* prefit) {
    const SplitRecords parts = split_records(records, split);

    EvalReport report;
    report.feature_set = spec.name;
    report.model_kind = "grouped";
    report.dimension = dimension;
    report.excluded_occupants = split.excluded_occupants;
    report.confusion = ConfusionMatrix(dimension_class_labels(dimension));

    const ProfileEncoder encoder(opts.leaky_profiles ? records
                                                     : std::span<const FusedRecord>(parts.train));
    auto [train_matrix, train_stats] =
        build_matrix_with_encoder(parts.train, spec, dimension, encoder, opts.tz, opts.build);
    auto [test_matrix, test_stats] =
        build_matrix_with_encoder(parts.test, spec, dimension, encoder, opts.tz, opts.build);
    report.train_exclusions = train_stats;
    report.test_exclusions = test_stats;
    report.rows_train = static_cast<std::int64_t>(train_matrix.size());
    report.rows_test = static_cast<std::int64_t>(test_matrix.size());

    RandomForestModel local;
    const RandomForestModel* model = prefit;
    if (!model) {
        local = fit_forest(train_matrix, opts.forest, opts.threads);
        model = &local;
    }

    const std::vector<int> preds = predict(*model, test_matrix);
    std::map<std::string, ConfusionMatrix> per_occ;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        report.confusion.add(test_matrix.labels[i], preds[i]);
        auto [it, inserted] = per_occ.try_emplace(test_matrix.occupant_ids[i],
                                                  dimension_class_labels(dimension));
        it->second.add(test_matrix.labels[i], preds[i]);
    }
    for (const auto& [occupant, confusion] : per_occ) {
        report.per_occupant[occupant] = {f1_micro(confusion), confusion.total()};
    }
    fill_report_metrics(report);
    return report;
}

EvalReport eval_individual(std::span<const FusedRecord> records, const SplitPlan& split,
                           const FeatureSetSpec& spec, Dimension dimension,
                           const EvalOptions& opts) {
    EvalReport report;
    report.feature_set = spec.name;
    report.model_kind = "individual";
    report.dimension = dimension;
    report.excluded_occupants = split.excluded_occupants;
    report.confusion = ConfusionMatrix(dimension_class_labels(dimension));

    for (const auto& [occupant, ids] : split.by_occupant) {
        const std::unordered_set<std::string> train_ids(ids.train_ids.begin(),
                                                        ids.train_ids.end());
        const std::unordered_set<std::string> test_ids(ids.test_ids.begin(),
                                                       ids.test_ids.end());
        const std::vector<FusedRecord> train = select_records(records, train_ids);
        const std::vector<FusedRecord> test = select_records(records, test_ids);

        try {
            const ProfileEncoder encoder(train);
            auto [train_matrix, train_stats] =
                build_matrix_with_encoder(train, spec, dimension, encoder, opts.tz, opts.build);
            auto [test_matrix, test_stats] =
                build_matrix_with_encoder(test, spec, dimension, encoder, opts.tz, opts.build);

            report.rows_train += static_cast<std::int64_t>(train_matrix.size());
            report.rows_test += static_cast<std::int64_t>(test_matrix.size());
            report.train_exclusions.input_rows += train_stats.input_rows;
            report.train_exclusions.rows_kept += train_stats.rows_kept;
            report.train_exclusions.rows_dropped += train_stats.rows_dropped;
            report.test_exclusions.input_rows += test_stats.input_rows;
            report.test_exclusions.rows_kept += test_stats.rows_kept;
            report.test_exclusions.rows_dropped += test_stats.rows_dropped;

            const RandomForestModel model = fit_forest(train_matrix, opts.forest, opts.threads);
            const std::vector<int> preds = predict(model, test_matrix);
            ConfusionMatrix confusion(dimension_class_labels(dimension));
            for (std::size_t i = 0; i < preds.size(); ++i)
                confusion.add(test_matrix.labels[i], preds[i]);
            report.confusion.merge(confusion);
            report.per_occupant[occupant] = {f1_micro(confusion), confusion.total()};
        } catch (const EmptyMatrixError&) {
            report.skipped_occupants.push_back(occupant);
        }
    }
    if (report.per_occupant.empty())
        throw EmptyMatrixError("no occupant had usable rows for feature set " + spec.name);
    fill_report_metrics(report);
    return report;
}

std::vector<ColdStartCurve> coldstart_curves(std::span<const FusedRecord> records,
                                             const SplitPlan& split, const FeatureSetSpec& spec,
                                             Dimension dimension, const EvalOptions& opts,
                                             int R, std::uint64_t seed, int max_k) {
    std::vector<std::string> occupants;
    for (const auto& [occupant, _] : split.by_occupant) occupants.push_back(occupant);
    const int n = static_cast<int>(occupants.size());
    if (n < 2) throw InsufficientOccupantsError("cold start needs >= 2 occupants, have " +
                                                std::to_string(n));
    if (R < 1) throw InvalidConfigError("cold start needs R >= 1 permutations");
    const int k_max = max_k > 0 ? std::min(max_k, n - 1) : n - 1;

    // Models are cached by their training cohort; the full cohort is shared by
    // every target's included curve at k = N-1 and matches eval_grouped.
    struct CohortModel {
        ProfileEncoder encoder;
        RandomForestModel model;
    };
    std::map<std::vector<std::string>, CohortModel> cache;

    const auto cohort_model = [&](const std::vector<std::string>& cohort) -> const CohortModel& {
        const auto it = cache.find(cohort);
        if (it != cache.end()) return it->second;
        std::unordered_set<std::string> ids;
        for (const std::string& occupant : cohort) {
            const auto& s = split.by_occupant.at(occupant);
            ids.insert(s.train_ids.begin(), s.train_ids.end());
        }
        const std::vector<FusedRecord> train = select_records(records, ids);
        ProfileEncoder encoder(train);
        auto [matrix, _] =
            build_matrix_with_encoder(train, spec, dimension, encoder, opts.tz, opts.build);
        RandomForestModel model = fit_forest(matrix, opts.forest, opts.threads);
        return cache.emplace(cohort, CohortModel{std::move(encoder), std::move(model)})
            .first->second;
    };

    std::vector<ColdStartCurve> curves;
    for (int ui = 0; ui < n; ++ui) {
        const std::string& target = occupants[static_cast<std::size_t>(ui)];
        const auto& target_split = split.by_occupant.at(target);
        const std::unordered_set<std::string> test_ids(target_split.test_ids.begin(),
                                                       target_split.test_ids.end());
        const std::vector<FusedRecord> test = select_records(records, test_ids);

        ColdStartCurve curve;
        curve.occupant_id = target;
        curve.dimension = dimension;

        std::vector<std::string> others;
        for (const std::string& occupant : occupants)
            if (occupant != target) others.push_back(occupant);

        for (int k = 1; k <= k_max; ++k) {
            Rng rng(mix_seed(seed, static_cast<std::uint64_t>(ui),
                             static_cast<std::uint64_t>(k)));
            std::vector<double> excluded_draws, included_draws;
            for (int r = 0; r < R; ++r) {
                // Partial Fisher-Yates: the first k entries are the subset.
                std::vector<std::string> pool = others;
                for (int i = 0; i < k; ++i) {
                    const auto j = static_cast<std::size_t>(i) +
                                   static_cast<std::size_t>(rng.below(pool.size() -
                                                                      static_cast<std::size_t>(i)));
                    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
                }
                std::vector<std::string> subset(pool.begin(), pool.begin() + k);
                std::sort(subset.begin(), subset.end());
                std::vector<std::string> with_target = subset;
                with_target.push_back(target);
                std::sort(with_target.begin(), with_target.end());

                try {
                    const CohortModel& excluded = cohort_model(subset);
                    const CohortModel& included = cohort_model(with_target);
                    auto [test_ex, s1] = build_matrix_with_encoder(
                        test, spec, dimension, excluded.encoder, opts.tz, opts.build);
                    auto [test_in, s2] = build_matrix_with_encoder(
                        test, spec, dimension, included.encoder, opts.tz, opts.build);
                    const auto preds_ex = predict(excluded.model, test_ex);
                    const auto preds_in = predict(included.model, test_in);
                    excluded_draws.push_back(f1_micro(test_ex.labels, preds_ex, 3));
                    included_draws.push_back(f1_micro(test_in.labels, preds_in, 3));
                } catch (const EmptyMatrixError&) {
                    // Both curves skip this draw so they stay comparable.
                }
            }
            if (!excluded_draws.empty()) {
                // Mean of R identical draws is that value exactly; at k = N-1
                // there is a single cohort, so the included point must equal
                // the grouped per-occupant score bit-for-bit.
                const auto mean = [](const std::vector<double>& values) {
                    const bool all_equal = std::all_of(
                        values.begin(), values.end(),
                        [&](const double v) { return v == values.front(); });
                    if (all_equal) return values.front();
                    double sum = 0;
                    for (const double v : values) sum += v;
                    return sum / static_cast<double>(values.size());
                };
                curve.points.push_back({k, mean(excluded_draws), mean(included_draws)});
            }
        }
        if (!curve.points.empty()) curves.push_back(std::move(curve));
    }
    return curves;
}

Forecast zone_forecast(std::span<const FusedRecord> records, const std::string& zone_id,
                       Dimension dimension, const EvalOptions& opts, int grid_minutes) {
    std::vector<FusedRecord> zone_records;
    for (const FusedRecord& rec : records)
        if (rec.zone_id == zone_id) zone_records.push_back(rec);
    if (zone_records.empty()) throw EmptyZoneError("no votes in zone " + zone_id);
    if (grid_minutes < 1 || grid_minutes > 24 * 60)
        throw InvalidConfigError("grid step must be within [1, 1440] minutes");

    const FeatureSetSpec time_only{"TimeOnly", {FeatureGroup::Time}};
    const ProfileEncoder encoder(zone_records);
    auto [matrix, _] = build_matrix_with_encoder(zone_records, time_only, dimension, encoder,
                                                 opts.tz, BuildOptions{});
    const RandomForestModel model = fit_forest(matrix, opts.forest, opts.threads);

    // Canonical week: the Monday 00:00 (local) on or before the earliest vote.
    Instant earliest = zone_records.front().vote.timestamp;
    for (const auto& rec : zone_records) earliest = std::min(earliest, rec.vote.timestamp);
    const CivilTime ct = civil_from_instant(earliest, opts.tz);
    const std::int64_t day = days_from_civil(ct.date.year, ct.date.month, ct.date.day);
    const int dow = static_cast<int>(((day % 7) + 7 + 3) % 7);
    const CivilDate monday = civil_from_days(day - dow);
    const Instant week_start =
        instant_from_civil(CivilTime{monday, 0, 0, 0}, opts.tz);

    // Historical (weekday, seconds-of-day) pairs for support counting.
    std::vector<std::pair<int, std::int64_t>> vote_times;
    vote_times.reserve(zone_records.size());
    for (const auto& rec : zone_records) {
        vote_times.emplace_back(weekday_monday0(rec.vote.timestamp, opts.tz),
                                local_seconds_of_day(rec.vote.timestamp, opts.tz));
    }

    Forecast forecast;
    forecast.zone_id = zone_id;
    forecast.dimension = dimension;
    forecast.class_labels = dimension_class_labels(dimension);

    const int steps = 7 * 24 * 60 / grid_minutes;
    for (int i = 0; i < steps; ++i) {
        const Instant t = week_start + static_cast<std::int64_t>(i) * grid_minutes * 60;
        const TimeEncoding te = encode_time_cyclical(t, opts.tz);
        const std::vector<double> row{te.hour_sin, te.hour_cos, te.dow_sin, te.dow_cos};
        const std::vector<double> model_probs = predict_proba_row(model, row);

        ForecastPoint point;
        point.timestamp = t;
        point.day_of_week = weekday_monday0(t, opts.tz);
        point.hour_local = local_hour(t, opts.tz);
        point.probs.assign(3, 0.0);
        for (std::size_t c = 0; c < model.classes.size(); ++c)
            point.probs[static_cast<std::size_t>(model.classes[c])] = model_probs[c];

        const std::int64_t tod = local_seconds_of_day(t, opts.tz);
        for (const auto& [vote_dow, vote_tod] : vote_times) {
            if (vote_dow != point.day_of_week) continue;
            const std::int64_t diff = std::abs(vote_tod - tod);
            if (std::min(diff, 86400 - diff) <= 3600) ++point.support;
        }
        point.low_confidence = point.support == 0;
        forecast.points.push_back(std::move(point));
    }
    return forecast;
}

std::string eval_report_to_json(const EvalReport& report) {
    nlohmann::json per_class = nlohmann::json::array();
    for (const auto& m : report.per_class) {
        per_class.push_back({{"label", m.label},
                             {"precision", m.precision},
                             {"recall", m.recall},
                             {"f1", m.f1},
                             {"support", m.support}});
    }
    nlohmann::json per_occupant = nlohmann::json::object();
    for (const auto& [occupant, score] : report.per_occupant) {
        per_occupant[occupant] = {{"f1", score.f1}, {"test_rows", score.test_rows}};
    }
    nlohmann::json exclusions{
        {"train",
         {{"input_rows", report.train_exclusions.input_rows},
          {"rows_kept", report.train_exclusions.rows_kept},
          {"rows_dropped", report.train_exclusions.rows_dropped},
          {"dropped_by_missing", report.train_exclusions.dropped_by_missing}}},
        {"test",
         {{"input_rows", report.test_exclusions.input_rows},
          {"rows_kept", report.test_exclusions.rows_kept},
          {"rows_dropped", report.test_exclusions.rows_dropped},
          {"dropped_by_missing", report.test_exclusions.dropped_by_missing}}}};
    nlohmann::json j{{"dimension", dimension_name(report.dimension)},
                     {"feature_set", report.feature_set},
                     {"model_kind", report.model_kind},
                     {"f1_micro", report.f1},
                     {"confusion", report.confusion.counts},
                     {"class_labels", report.confusion.class_labels},
                     {"per_class", per_class},
                     {"rows_train", report.rows_train},
                     {"rows_test", report.rows_test},
                     {"per_occupant", per_occupant},
                     {"skipped_occupants", report.skipped_occupants},
                     {"excluded_occupants", report.excluded_occupants},
                     {"exclusions", exclusions}};
    return j.dump();
}

void write_coldstart_csv(const std::filesystem::path& path,
                         std::span<const ColdStartCurve> curves) {
    CsvWriter w(path);
    w.row({"occupant_id", "dimension", "k", "f1_excluded", "f1_included"});
    for (const auto& curve : curves) {
        for (const auto& point : curve.points) {
            w.row({curve.occupant_id, std::string(dimension_name(curve.dimension)),
                   std::to_string(point.k), format_double(point.f1_excluded),
                   format_double(point.f1_included)});
        }
    }
}

void write_forecast_csv(const std::filesystem::path& path, const Forecast& forecast) {
    CsvWriter w(path);
    std::vector<std::string> header{"timestamp", "day_of_week", "hour_local"};
    for (const auto& label : forecast.class_labels) header.push_back("p_" + label);
    header.push_back("support");
    header.push_back("low_confidence");
    w.row(header);
    for (const auto& point : forecast.points) {
        std::vector<std::string> row{format_rfc3339(point.timestamp),
                                     std::to_string(point.day_of_week),
                                     format_double(point.hour_local)};
        for (const double p : point.probs) row.push_back(format_double(p));
        row.push_back(std::to_string(point.support));
        row.push_back(point.low_confidence ? "1" : "0");
        w.row(row);
    }
}

}  // namespace comfort
