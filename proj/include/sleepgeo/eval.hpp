#ifndef SLEEPGEO_EVAL_HPP
#define SLEEPGEO_EVAL_HPP

#include "sleepgeo/hmm.hpp"

#include <array>
#include <cstdint>
#include <span>

namespace sleepgeo {

// Rows = expert class, columns = predicted class, both 1..5.
struct ConfusionMatrix {
    Eigen::Matrix<long long, kNumStages, kNumStages> m =
        Eigen::Matrix<long long, kNumStages, kNumStages>::Zero();

    long long total() const { return m.sum(); }
    ConfusionMatrix& operator+=(const ConfusionMatrix& other) {
        m += other.m;
        return *this;
    }
};

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool defined = true; // false iff the class is absent from both axes
};

struct MetricsReport {
    std::array<ClassMetrics, kNumStages> per_class;
    double accuracy = 0.0;
    double macro_f1 = 0.0; // mean over defined classes
    double expected_accuracy = 0.0;
    double kappa = 0.0;
};

MetricsReport metrics(const ConfusionMatrix& cm);

// One night of one subject: aligned stage labels (1..5) and feature rows.
struct NightRecord {
    std::vector<int> stages;
    Matrix features;
};

struct SubjectRecord {
    std::string id;
    double age = 0.0;
    std::vector<NightRecord> nights;
};

// Indices into `pool` of the k_hat subjects with the smallest |age - test
// age|; age ties take the smaller id.
std::vector<int> select_training_subjects(const std::vector<SubjectRecord>& pool,
                                          double test_age, int k_hat);

// Per-recording class balancing: uniformly subsample each present stage
// down to the least-represented present stage's count. Returns kept epoch
// indices in temporal order.
std::vector<int> class_balance(std::span<const int> stages, std::uint64_t seed,
                               WarningLog* warnings = nullptr);

struct EvalConfig {
    int k_hat = 9;            // age-matched training subjects per fold
    int codebook_size = 64;   // |O|, power of two
    double kappa = 1.0;       // additive smoothing for HMM estimation
    std::uint64_t seed = 7;
};

struct NightOutcome {
    std::string subject_id;
    int night_index = 0;
    ConfusionMatrix confusion;
    MetricsReport metrics;
    std::vector<int> truth;
    std::vector<int> predicted;
};

struct SummaryStats {
    double mean = 0.0;
    double stddev = 0.0; // sample standard deviation over nights
};

struct EvalReport {
    ConfusionMatrix pooled;
    MetricsReport pooled_metrics;
    std::vector<NightOutcome> nights;
    SummaryStats accuracy_per_night;
    SummaryStats macro_f1_per_night;
    SummaryStats kappa_per_night;
    std::uint64_t seed = 0;
};

// Trains one fold's model: codebook and emissions from class-balanced
// training epochs, transitions from the full training stage sequences.
HmmModel train_fold_model(const std::vector<const SubjectRecord*>& training,
                          const EvalConfig& config, std::uint64_t fold_seed,
                          WarningLog* warnings = nullptr);

// Leave-one-subject-out cross-validation over all subjects.
EvalReport losocv(const std::vector<SubjectRecord>& dataset, const EvalConfig& config,
                  WarningLog* warnings = nullptr);

// Group k-fold: subjects are shuffled (seeded) into `folds` groups; each
// group is held out in turn and its subjects are decoded with models
// trained on age-selected subjects from the remaining groups.
EvalReport kfold(const std::vector<SubjectRecord>& dataset, int folds, const EvalConfig& config,
                 WarningLog* warnings = nullptr);

} // namespace sleepgeo

#endif
