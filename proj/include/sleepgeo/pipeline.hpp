#ifndef SLEEPGEO_PIPELINE_HPP
#define SLEEPGEO_PIPELINE_HPP

#include "sleepgeo/eval.hpp"
#include "sleepgeo/fusion.hpp"
#include "sleepgeo/io.hpp"
#include "sleepgeo/sst.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace sleepgeo {

// Every tunable of the ingest -> features -> embed -> fuse -> HMM ->
// evaluation chain. Field defaults are the reference configuration.
struct PipelineConfig {
    // ingest
    std::vector<std::string> channels = {"EEG Fpz-Cz", "EEG Pz-Oz"};
    double epoch_s = 30.0;
    double wake_margin_min = 30.0;

    // spectral features
    double tau = 0.01;
    int window_len = 1001;
    double window_sigma = 0.0; // samples; 0 = (window_len-1)/10
    int num_bins = 4004;
    int guard_bins = 16;
    double discard_rel = 1e-12;
    int column_stride = 1;
    std::vector<double> band_edges = {0.5, 4, 7, 12, 16, 20, 24, 28, 31, 49};

    // diffusion geometry
    double alpha = 0.1;      // neighborhood ratio for local covariances
    int md_rank = 7;         // truncation rank d of the local Mahalanobis form
    double eps_quantile = 0.05;
    double kernel_diagonal = 0.0;
    double diffusion_time = 1.0;
    int d_hat = 10;
    int d_tilde = 10;
    bool raw_euclidean = false; // bypass local MD, use plain squared distances

    // annotation model
    int codebook_size = 64;
    double smoothing_kappa = 1.0;
    int k_hat = 9;
    int folds = 0; // 0 = leave-one-subject-out
    std::uint64_t seed = 7;

    SstParams sst_params() const;
    BandSet band_set() const;
    EvalConfig eval_config() const;
    void validate() const;

    // Flat "key = value" echo used in reports and manifests.
    std::map<std::string, std::string> echo() const;
};

// features: one labeled feature table per channel of one recording.
struct FeatureResult {
    std::vector<int> epoch_index; // original epoch ordinals after truncation
    std::vector<int> stages;
    std::vector<Matrix> per_channel; // rows align with stages
    int dropped_epochs = 0;
    int excluded_epochs = 0;
};

FeatureResult extract_features(const Recording& rec, const Hypnogram& hyp,
                               const PipelineConfig& config, WarningLog* warnings = nullptr);

// Single-channel intrinsic embedding (DM over the local-Mahalanobis metric).
Embedding intrinsic_embedding(const Matrix& features, const PipelineConfig& config,
                              WarningLog* warnings = nullptr);

// Two-channel fusion over one point set (one recording, or several pooled):
// ADM coordinates plus co-clustering coordinates for both channels.
struct FusionResult {
    Matrix common;     // J x (d_hat + 2 d_tilde)
    Embedding adm;     // psi coordinates
    Matrix cocluster;  // 2J x d_tilde
};

FusionResult fuse_channels(const Matrix& features_x, const Matrix& features_y,
                           const PipelineConfig& config, WarningLog* warnings = nullptr);

// --- file-level commands (the CLI is a thin wrapper over these) ---

struct FeatureFiles {
    std::vector<std::string> per_channel_csv;
    int epochs = 0;
};

// EDF + hypnogram -> one feature CSV per channel:
//   <out_prefix>.<channel-sanitized>.csv  with columns stage,u0..u9
// plus <out_prefix>.epochs.csv carrying epoch ordinals.
FeatureFiles cmd_features(const std::string& edf_path, const std::string& hypnogram_path,
                          const std::string& out_prefix, const PipelineConfig& config);

// Per-channel intrinsic embeddings for one recording's feature CSVs.
void cmd_embed(const std::vector<std::string>& feature_csvs, const std::string& out_prefix,
               const PipelineConfig& config);

// Fusion over a set of recordings (each a pair of per-channel feature
// CSVs; pass one recording for per-recording scope, several to pool a
// common geometry). Writes per-recording common-feature CSVs
// (epoch_index,stage,v1..) and the three scatter exports.
void cmd_fuse(const std::vector<std::string>& channel1_csvs,
              const std::vector<std::string>& channel2_csvs,
              const std::vector<std::string>& out_prefixes, const PipelineConfig& config);

// Train an HMM from common-feature CSVs (class-balanced codebook and
// emissions, full-sequence transitions); model written as JSON.
void cmd_train(const std::vector<std::string>& common_csvs, const std::string& model_path,
               const PipelineConfig& config);

// Decode one night with a trained model -> CSV epoch,truth,pred.
void cmd_predict(const std::string& model_path, const std::string& common_csv,
                 const std::string& out_csv);

HmmModel load_model(const std::string& path);
void save_model(const std::string& path, const HmmModel& model, const PipelineConfig& config);

// Dataset manifest for evaluation: JSON
//   {"subjects":[{"id":"...","age":30,"nights":["night1.csv",...]},...]}
// where each night CSV is a cmd_fuse output.
std::vector<SubjectRecord> load_dataset_manifest(const std::string& path);

// LOSOCV (folds = 0) or group k-fold evaluation; writes the report text,
// pooled confusion CSV, and per-night epoch,truth,pred CSVs.
EvalReport cmd_evaluate(const std::string& manifest_path, const std::string& out_prefix,
                        const PipelineConfig& config);

std::string render_report(const EvalReport& report, const PipelineConfig& config);

// SST spectrogram export for plotting: dense binary matrix (SGMAT1) of the
// synchrosqueezed spectrum over a sample range, bins covering the band
// range, plus a CSV of the per-epoch features.
void cmd_export(const std::string& edf_path, const std::string& channel,
                const std::string& out_prefix, long sample_begin, long sample_end,
                const PipelineConfig& config);

} // namespace sleepgeo

#endif
