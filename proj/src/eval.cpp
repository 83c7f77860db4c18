#include "sleepgeo/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace sleepgeo {

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted) {
    if (truth.size() != predicted.size()) {
        throw DataError("truth and prediction lengths differ: " + std::to_string(truth.size()) +
                        " vs " + std::to_string(predicted.size()));
    }
    ConfusionMatrix cm;
    for (size_t t = 0; t < truth.size(); ++t) {
        const int p = truth[t], q = predicted[t];
        if (p < 1 || p > kNumStages || q < 1 || q > kNumStages) {
            throw DataError("stage code out of range 1..5");
        }
        cm.m(p - 1, q - 1) += 1;
    }
    return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
    const long long total = cm.total();
    if (total <= 0) throw DataError("confusion matrix is empty");

    MetricsReport r;
    long long diag = 0;
    double ea_num = 0.0;
    int defined = 0;
    double f1_sum = 0.0;
    for (int p = 0; p < kNumStages; ++p) {
        const long long row = cm.m.row(p).sum();
        const long long col = cm.m.col(p).sum();
        const long long hit = cm.m(p, p);
        diag += hit;
        ea_num += static_cast<double>(row) * static_cast<double>(col);

        ClassMetrics& c = r.per_class[static_cast<size_t>(p)];
        if (row == 0 && col == 0) {
            c.defined = false;
            continue;
        }
        c.precision = col > 0 ? static_cast<double>(hit) / static_cast<double>(col) : 0.0;
        c.recall = row > 0 ? static_cast<double>(hit) / static_cast<double>(row) : 0.0;
        c.f1 = (c.precision + c.recall) > 0.0
                   ? 2.0 * c.precision * c.recall / (c.precision + c.recall)
                   : 0.0;
        ++defined;
        f1_sum += c.f1;
    }
    r.accuracy = static_cast<double>(diag) / static_cast<double>(total);
    r.macro_f1 = defined > 0 ? f1_sum / static_cast<double>(defined) : 0.0;
    r.expected_accuracy = ea_num / (static_cast<double>(total) * static_cast<double>(total));
    if (std::abs(1.0 - r.expected_accuracy) < 1e-15) {
        r.kappa = std::abs(r.accuracy - 1.0) < 1e-15 ? 1.0 : 0.0;
    } else {
        r.kappa = (r.accuracy - r.expected_accuracy) / (1.0 - r.expected_accuracy);
    }
    return r;
}

std::vector<int> select_training_subjects(const std::vector<SubjectRecord>& pool, double test_age,
                                          int k_hat) {
    if (k_hat < 1 || k_hat > static_cast<int>(pool.size())) {
        throw DataError("k_hat = " + std::to_string(k_hat) + " exceeds pool size " +
                        std::to_string(pool.size()));
    }
    std::vector<int> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double da = std::abs(pool[static_cast<size_t>(a)].age - test_age);
        const double db = std::abs(pool[static_cast<size_t>(b)].age - test_age);
        if (da != db) return da < db;
        return pool[static_cast<size_t>(a)].id < pool[static_cast<size_t>(b)].id;
    });
    order.resize(static_cast<size_t>(k_hat));
    return order;
}

namespace {

// Deterministic bounded draw; avoids the implementation-defined behavior of
// std::uniform_int_distribution.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t threshold = (~n + 1) % n; // 2^64 mod n
    for (;;) {
        const std::uint64_t r = rng();
        if (r >= threshold) return r % n;
    }
}

// Partial Fisher-Yates: deterministic uniform subsample without replacement,
// returned in the input order.
std::vector<int> subsample(const std::vector<int>& items, size_t count, std::mt19937_64& rng) {
    std::vector<int> pool = items;
    for (size_t i = 0; i < count; ++i) {
        const size_t j = i + static_cast<size_t>(bounded(rng, pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    std::sort(pool.begin(), pool.end());
    return pool;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    // splitmix64 step
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

std::vector<int> class_balance(std::span<const int> stages, std::uint64_t seed,
                               WarningLog* warnings) {
    std::array<std::vector<int>, kNumStages> by_stage;
    for (size_t t = 0; t < stages.size(); ++t) {
        const int s = stages[t];
        if (s < 1 || s > kNumStages) throw DataError("stage code out of range 1..5");
        by_stage[static_cast<size_t>(s - 1)].push_back(static_cast<int>(t));
    }
    size_t min_count = std::numeric_limits<size_t>::max();
    int present = 0;
    for (const auto& v : by_stage) {
        if (v.empty()) continue;
        ++present;
        min_count = std::min(min_count, v.size());
    }
    if (present == 0) return {};
    if (present < kNumStages) {
        warn(warnings, "recording is missing " + std::to_string(kNumStages - present) +
                           " stage(s); balancing over present stages only");
    }

    std::mt19937_64 rng(seed);
    std::vector<int> kept;
    for (const auto& v : by_stage) {
        if (v.empty()) continue;
        std::vector<int> take = subsample(v, min_count, rng);
        kept.insert(kept.end(), take.begin(), take.end());
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

HmmModel train_fold_model(const std::vector<const SubjectRecord*>& training,
                          const EvalConfig& config, std::uint64_t fold_seed,
                          WarningLog* warnings) {
    std::vector<std::vector<int>> full_stage_seqs;
    std::vector<std::vector<int>> balanced_stage_seqs;
    std::vector<Matrix> balanced_features;
    long balanced_rows = 0;

    std::uint64_t night_salt = 0;
    for (const SubjectRecord* subject : training) {
        for (const NightRecord& night : subject->nights) {
            if (static_cast<long>(night.stages.size()) != night.features.rows()) {
                throw DataError("subject " + subject->id +
                                ": stage and feature row counts differ");
            }
            full_stage_seqs.push_back(night.stages);
            const std::vector<int> kept =
                class_balance(night.stages, mix_seed(fold_seed, night_salt++), warnings);
            Matrix rows(static_cast<long>(kept.size()), night.features.cols());
            std::vector<int> stages;
            stages.reserve(kept.size());
            for (size_t i = 0; i < kept.size(); ++i) {
                rows.row(static_cast<long>(i)) = night.features.row(kept[i]);
                stages.push_back(night.stages[static_cast<size_t>(kept[i])]);
            }
            balanced_rows += rows.rows();
            balanced_features.push_back(std::move(rows));
            balanced_stage_seqs.push_back(std::move(stages));
        }
    }
    if (balanced_rows == 0) throw DataError("no training epochs after balancing");

    Matrix pooled(balanced_rows, balanced_features.front().cols());
    long at = 0;
    for (const Matrix& rows : balanced_features) {
        pooled.middleRows(at, rows.rows()) = rows;
        at += rows.rows();
    }

    HmmModel model;
    model.codebook = lbg_codebook(pooled, config.codebook_size, fold_seed);
    // Transitions come from the unbalanced sequences: subsampling would
    // splice non-adjacent epochs together.
    model.transition = estimate_transitions(full_stage_seqs, config.kappa);

    std::vector<std::vector<int>> balanced_symbol_seqs;
    balanced_symbol_seqs.reserve(balanced_features.size());
    for (const Matrix& rows : balanced_features) {
        balanced_symbol_seqs.push_back(quantize_all(model.codebook, rows));
    }
    model.emission = estimate_emissions(balanced_stage_seqs, balanced_symbol_seqs,
                                        config.codebook_size, config.kappa);
    return model;
}

namespace {

SummaryStats summarize(const std::vector<double>& values) {
    SummaryStats s;
    if (values.empty()) return s;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) /
             static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

void decode_subject(const SubjectRecord& subject, const HmmModel& model, EvalReport& report) {
    int night_index = 0;
    for (const NightRecord& night : subject.nights) {
        NightOutcome outcome;
        outcome.subject_id = subject.id;
        outcome.night_index = night_index++;
        outcome.truth = night.stages;
        const std::vector<int> symbols = quantize_all(model.codebook, night.features);
        outcome.predicted = viterbi(model, symbols).path;
        outcome.confusion = confusion(outcome.truth, outcome.predicted);
        outcome.metrics = metrics(outcome.confusion);
        report.pooled += outcome.confusion;
        report.nights.push_back(std::move(outcome));
    }
}

void finalize_report(EvalReport& report) {
    report.pooled_metrics = metrics(report.pooled);
    std::vector<double> acc, mf1, kap;
    for (const NightOutcome& n : report.nights) {
        acc.push_back(n.metrics.accuracy);
        mf1.push_back(n.metrics.macro_f1);
        kap.push_back(n.metrics.kappa);
    }
    report.accuracy_per_night = summarize(acc);
    report.macro_f1_per_night = summarize(mf1);
    report.kappa_per_night = summarize(kap);
}

} // namespace

EvalReport losocv(const std::vector<SubjectRecord>& dataset, const EvalConfig& config,
                  WarningLog* warnings) {
    if (static_cast<int>(dataset.size()) < config.k_hat + 1) {
        throw DataError("LOSOCV needs at least k_hat + 1 = " + std::to_string(config.k_hat + 1) +
                        " subjects, got " + std::to_string(dataset.size()));
    }
    EvalReport report;
    report.seed = config.seed;
    for (size_t test = 0; test < dataset.size(); ++test) {
        std::vector<SubjectRecord> pool;
        for (size_t i = 0; i < dataset.size(); ++i) {
            if (i != test) pool.push_back(dataset[i]);
        }
        const std::vector<int> chosen =
            select_training_subjects(pool, dataset[test].age, config.k_hat);
        std::vector<const SubjectRecord*> training;
        training.reserve(chosen.size());
        for (int idx : chosen) {
            const SubjectRecord* s = &pool[static_cast<size_t>(idx)];
            if (s->id == dataset[test].id) {
                throw DataError("test subject leaked into its own training set");
            }
            training.push_back(s);
        }
        const HmmModel model =
            train_fold_model(training, config, mix_seed(config.seed, test), warnings);
        decode_subject(dataset[test], model, report);
    }
    finalize_report(report);
    return report;
}

EvalReport kfold(const std::vector<SubjectRecord>& dataset, int folds, const EvalConfig& config,
                 WarningLog* warnings) {
    const int n = static_cast<int>(dataset.size());
    if (folds < 2 || folds > n) {
        throw DataError("fold count must lie in 2..subject count");
    }
    // Seeded shuffle, then round-robin group assignment.
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(mix_seed(config.seed, 0xf01d));
    for (size_t i = 0; i + 1 < order.size(); ++i) {
        const size_t j = i + static_cast<size_t>(bounded(rng, order.size() - i));
        std::swap(order[i], order[j]);
    }
    std::vector<int> group(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) group[static_cast<size_t>(order[static_cast<size_t>(i)])] = i % folds;

    EvalReport report;
    report.seed = config.seed;
    for (int g = 0; g < folds; ++g) {
        std::vector<SubjectRecord> pool;
        for (int i = 0; i < n; ++i) {
            if (group[static_cast<size_t>(i)] != g) pool.push_back(dataset[static_cast<size_t>(i)]);
        }
        for (int i = 0; i < n; ++i) {
            if (group[static_cast<size_t>(i)] != g) continue;
            const SubjectRecord& test = dataset[static_cast<size_t>(i)];
            const std::vector<int> chosen = select_training_subjects(pool, test.age, config.k_hat);
            std::vector<const SubjectRecord*> training;
            for (int idx : chosen) training.push_back(&pool[static_cast<size_t>(idx)]);
            const HmmModel model = train_fold_model(
                training, config, mix_seed(config.seed, static_cast<std::uint64_t>(i)), warnings);
            decode_subject(test, model, report);
        }
    }
    finalize_report(report);
    return report;
}

} // namespace sleepgeo
