// sleepgeo: batch CLI over the sleep-dynamics pipeline.
// Exit codes: 0 ok, 1 usage, 2 data error, 3 numerical failure.

#include "sleepgeo/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

void add_config_options(CLI::App* app, sleepgeo::PipelineConfig& cfg) {
    app->add_option("--channels", cfg.channels, "channel labels (one or two)")
        ->delimiter(';')
        ->capture_default_str();
    app->add_option("--epoch-s", cfg.epoch_s, "epoch length in seconds")->capture_default_str();
    app->add_option("--wake-margin-min", cfg.wake_margin_min,
                    "minutes of leading/trailing wake kept around sleep")
        ->capture_default_str();
    app->add_option("--tau", cfg.tau, "seconds per sample")->capture_default_str();
    app->add_option("--window-len", cfg.window_len, "STFT window length H (odd samples)")
        ->capture_default_str();
    app->add_option("--window-sigma", cfg.window_sigma,
                    "Gaussian sigma in samples (0 = support/10)")
        ->capture_default_str();
    app->add_option("--num-bins", cfg.num_bins, "FFT length K")->capture_default_str();
    app->add_option("--guard-bins", cfg.guard_bins, "extra stored bins above the band range")
        ->capture_default_str();
    app->add_option("--discard-rel", cfg.discard_rel, "reassignment discard floor")
        ->capture_default_str();
    app->add_option("--column-stride", cfg.column_stride,
                    "per-epoch STFT column stride (1 = exact)")
        ->capture_default_str();
    app->add_option("--band-edges", cfg.band_edges, "10 band edges in Hz")
        ->delimiter(';')
        ->capture_default_str();
    app->add_option("--alpha", cfg.alpha, "neighborhood ratio for local covariances")
        ->capture_default_str();
    app->add_option("--md-rank", cfg.md_rank, "local Mahalanobis truncation rank d")
        ->capture_default_str();
    app->add_option("--eps-quantile", cfg.eps_quantile, "kernel bandwidth quantile")
        ->capture_default_str();
    app->add_option("--kernel-diagonal", cfg.kernel_diagonal, "affinity diagonal value")
        ->capture_default_str();
    app->add_option("--diffusion-time", cfg.diffusion_time, "diffusion time t")
        ->capture_default_str();
    app->add_option("--d-hat", cfg.d_hat, "diffusion embedding dimension")->capture_default_str();
    app->add_option("--d-tilde", cfg.d_tilde, "co-clustering dimension")->capture_default_str();
    app->add_flag("--raw-euclidean", cfg.raw_euclidean,
                  "use plain squared Euclidean distances instead of local Mahalanobis");
    app->add_option("--codebook-size", cfg.codebook_size, "LBG codebook size (power of two)")
        ->capture_default_str();
    app->add_option("--kappa", cfg.smoothing_kappa, "additive smoothing for HMM estimates")
        ->capture_default_str();
    app->add_option("--k-hat", cfg.k_hat, "age-matched training subjects per fold")
        ->capture_default_str();
    app->add_option("--folds", cfg.folds, "fold count (0 = leave-one-subject-out)")
        ->capture_default_str();
    app->add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sleep-dynamics geometry pipeline"};
    app.set_config("--config", "", "key = value configuration file");
    app.require_subcommand(1);

    sleepgeo::PipelineConfig cfg;
    add_config_options(&app, cfg);

    std::string edf_path, hypnogram_path, out_prefix, model_path, common_csv, out_csv;
    std::string manifest_path, channel;
    std::vector<std::string> feature_csvs, channel1_csvs, channel2_csvs, out_prefixes,
        common_csvs;
    long sample_begin = 0, sample_end = -1;

    CLI::App* features = app.add_subcommand("features", "EDF -> per-channel epoch feature CSVs");
    features->add_option("--edf", edf_path, "EDF recording")->required();
    features->add_option("--hypnogram", hypnogram_path, "EDF+ or CSV hypnogram")->required();
    features->add_option("--out", out_prefix, "output path prefix")->required();

    CLI::App* embed = app.add_subcommand("embed", "feature CSVs -> intrinsic embedding CSVs");
    embed->add_option("--features", feature_csvs, "per-channel feature CSVs")->required();
    embed->add_option("--out", out_prefix, "output path prefix")->required();

    CLI::App* fuse = app.add_subcommand(
        "fuse", "two-channel feature CSVs -> common intrinsic feature CSVs");
    fuse->add_option("--channel1", channel1_csvs, "channel-1 feature CSVs, one per recording")
        ->required();
    fuse->add_option("--channel2", channel2_csvs, "channel-2 feature CSVs, one per recording")
        ->required();
    fuse->add_option("--out", out_prefixes, "output prefix per recording")->required();

    CLI::App* train = app.add_subcommand("train", "common-feature CSVs -> HMM model JSON");
    train->add_option("--common", common_csvs, "training common-feature CSVs")->required();
    train->add_option("--model", model_path, "output model path")->required();

    CLI::App* predict = app.add_subcommand("predict", "model + common-feature CSV -> hypnogram");
    predict->add_option("--model", model_path, "model JSON")->required();
    predict->add_option("--common", common_csv, "common-feature CSV")->required();
    predict->add_option("--out", out_csv, "output CSV (epoch,truth,pred)")->required();

    CLI::App* evaluate = app.add_subcommand("evaluate", "dataset manifest -> CV report");
    evaluate->add_option("--dataset", manifest_path, "dataset manifest JSON")->required();
    evaluate->add_option("--out", out_prefix, "output path prefix")->required();

    CLI::App* exporter = app.add_subcommand("export", "EDF -> synchrosqueezed spectrum dump");
    exporter->add_option("--edf", edf_path, "EDF recording")->required();
    exporter->add_option("--channel", channel, "channel label")->required();
    exporter->add_option("--out", out_prefix, "output path prefix")->required();
    exporter->add_option("--begin", sample_begin, "first sample");
    exporter->add_option("--end", sample_end, "one past the last sample (-1 = all)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (features->parsed()) {
            sleepgeo::FeatureFiles out = sleepgeo::cmd_features(edf_path, hypnogram_path,
                                                                out_prefix, cfg);
            std::cout << "wrote " << out.per_channel_csv.size() << " channel CSV(s), "
                      << out.epochs << " epochs\n";
        } else if (embed->parsed()) {
            sleepgeo::cmd_embed(feature_csvs, out_prefix, cfg);
        } else if (fuse->parsed()) {
            sleepgeo::cmd_fuse(channel1_csvs, channel2_csvs, out_prefixes, cfg);
        } else if (train->parsed()) {
            sleepgeo::cmd_train(common_csvs, model_path, cfg);
        } else if (predict->parsed()) {
            sleepgeo::cmd_predict(model_path, common_csv, out_csv);
        } else if (evaluate->parsed()) {
            sleepgeo::EvalReport report = sleepgeo::cmd_evaluate(manifest_path, out_prefix, cfg);
            std::cout << "pooled accuracy = "
                      << sleepgeo::format_double(report.pooled_metrics.accuracy)
                      << ", kappa = " << sleepgeo::format_double(report.pooled_metrics.kappa)
                      << "\n";
        } else if (exporter->parsed()) {
            sleepgeo::cmd_export(edf_path, channel, out_prefix, sample_begin, sample_end, cfg);
        }
    } catch (const sleepgeo::NumericError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const sleepgeo::ParseError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const sleepgeo::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
