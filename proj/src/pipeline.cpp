#include "sleepgeo/pipeline.hpp"

#include "sleepgeo/edf.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace sleepgeo {

namespace fs = std::filesystem;
using nlohmann::json;

SstParams PipelineConfig::sst_params() const {
    SstParams p;
    p.tau = tau;
    p.window_len = window_len;
    p.window_sigma = window_sigma;
    p.num_bins = num_bins;
    p.guard_bins = guard_bins;
    p.discard_rel = discard_rel;
    const double cap_hz = std::max(50.0, band_edges.empty() ? 50.0 : band_edges.back() + 1.0);
    p.stored_bins = SstParams::bins_covering(cap_hz, tau, num_bins, guard_bins);
    return p;
}

BandSet PipelineConfig::band_set() const {
    if (band_edges.size() != 10) {
        throw DataError("band_edges must list 10 ascending frequencies (9 bands)");
    }
    BandSet s;
    for (size_t i = 0; i + 1 < band_edges.size(); ++i) {
        if (band_edges[i + 1] <= band_edges[i]) {
            throw DataError("band_edges must be strictly ascending");
        }
        s.bands.push_back(Band{band_edges[i], band_edges[i + 1]});
    }
    s.total_lo_hz = band_edges.front();
    s.total_hi_hz = band_edges.back();
    return s;
}

EvalConfig PipelineConfig::eval_config() const {
    EvalConfig e;
    e.k_hat = k_hat;
    e.codebook_size = codebook_size;
    e.kappa = smoothing_kappa;
    e.seed = seed;
    return e;
}

void PipelineConfig::validate() const {
    sst_params().validate();
    band_set();
    if (channels.empty() || channels.size() > 2) {
        throw DataError("config must name one or two channels");
    }
    if (epoch_s <= 0) throw DataError("epoch_s must be positive");
    if (wake_margin_min < 0) throw DataError("wake_margin_min must be nonnegative");
    if (alpha <= 0 || alpha >= 1) throw DataError("alpha must lie in (0,1)");
    if (md_rank < 0 || md_rank > 10) throw DataError("md_rank must lie in 0..10");
    if (eps_quantile <= 0 || eps_quantile > 1) throw DataError("eps_quantile must lie in (0,1]");
    if (diffusion_time <= 0) throw DataError("diffusion_time must be positive");
    if (d_hat < 1) throw DataError("d_hat must be >= 1");
    if (d_tilde < 1) throw DataError("d_tilde must be >= 1");
    if (codebook_size < 1 || (codebook_size & (codebook_size - 1)) != 0) {
        throw DataError("codebook_size must be a power of two");
    }
    if (smoothing_kappa < 0) throw DataError("smoothing_kappa must be nonnegative");
    if (k_hat < 1) throw DataError("k_hat must be >= 1");
    if (folds < 0) throw DataError("folds must be >= 0");
    if (column_stride < 1) throw DataError("column_stride must be >= 1");
}

std::map<std::string, std::string> PipelineConfig::echo() const {
    std::map<std::string, std::string> m;
    std::string chans;
    for (const std::string& c : channels) {
        if (!chans.empty()) chans += ";";
        chans += c;
    }
    m["channels"] = chans;
    m["epoch_s"] = format_double(epoch_s);
    m["wake_margin_min"] = format_double(wake_margin_min);
    m["tau"] = format_double(tau);
    m["window_len"] = std::to_string(window_len);
    m["window_sigma"] = format_double(window_sigma);
    m["num_bins"] = std::to_string(num_bins);
    m["guard_bins"] = std::to_string(guard_bins);
    m["discard_rel"] = format_double(discard_rel);
    m["column_stride"] = std::to_string(column_stride);
    std::string edges;
    for (double e : band_edges) {
        if (!edges.empty()) edges += ";";
        edges += format_double(e);
    }
    m["band_edges"] = edges;
    m["alpha"] = format_double(alpha);
    m["md_rank"] = std::to_string(md_rank);
    m["eps_quantile"] = format_double(eps_quantile);
    m["kernel_diagonal"] = format_double(kernel_diagonal);
    m["diffusion_time"] = format_double(diffusion_time);
    m["d_hat"] = std::to_string(d_hat);
    m["d_tilde"] = std::to_string(d_tilde);
    m["raw_euclidean"] = raw_euclidean ? "true" : "false";
    m["codebook_size"] = std::to_string(codebook_size);
    m["smoothing_kappa"] = format_double(smoothing_kappa);
    m["k_hat"] = std::to_string(k_hat);
    m["folds"] = std::to_string(folds);
    m["seed"] = std::to_string(seed);
    return m;
}

FeatureResult extract_features(const Recording& rec, const Hypnogram& hyp,
                               const PipelineConfig& config, WarningLog* warnings) {
    config.validate();
    Segmentation seg = segment_epochs(rec, hyp, config.epoch_s, warnings);
    std::vector<LabeledEpoch> epochs =
        truncate_wake(std::move(seg.epochs), config.wake_margin_min, config.epoch_s, warnings);

    FeatureResult out;
    out.dropped_epochs = seg.dropped;
    for (const LabeledEpoch& e : epochs) {
        if (e.excluded()) {
            ++out.excluded_epochs;
            continue;
        }
        out.epoch_index.push_back(e.index);
        out.stages.push_back(static_cast<int>(*e.stage));
    }
    if (out.epoch_index.empty()) throw DataError("no scorable epochs after exclusions");

    const SstParams sst = config.sst_params();
    const BandSet bands = config.band_set();
    for (const std::string& label : config.channels) {
        const Channel& ch = rec.channel(label);
        if (std::abs(ch.sampling_rate - 1.0 / config.tau) > 1e-6) {
            throw DataError("channel '" + label + "' samples at " +
                            format_double(ch.sampling_rate) + " Hz but tau implies " +
                            format_double(1.0 / config.tau) + " Hz");
        }
        std::vector<EpochFeature> feats =
            epoch_band_features(ch.samples, sst, bands, out.epoch_index, config.epoch_s,
                                config.column_stride);
        Matrix u(static_cast<long>(feats.size()), 10);
        for (size_t r = 0; r < feats.size(); ++r) u.row(static_cast<long>(r)) = feats[r].u;
        out.per_channel.push_back(std::move(u));
    }
    return out;
}

namespace {

Matrix pairwise_sq_euclidean(const Matrix& points) {
    const int n = static_cast<int>(points.rows());
    Matrix d2 = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double d = (points.row(i) - points.row(j)).squaredNorm();
            d2(i, j) = d;
            d2(j, i) = d;
        }
    }
    return d2;
}

Matrix metric_sq(const Matrix& features, const PipelineConfig& config, WarningLog* warnings) {
    if (config.raw_euclidean) return pairwise_sq_euclidean(features);
    LocalCovariances cov = local_covariances(features, config.alpha);
    return local_mahalanobis_sq(features, cov, config.md_rank, warnings);
}

} // namespace

Embedding intrinsic_embedding(const Matrix& features, const PipelineConfig& config,
                              WarningLog* warnings) {
    AffinityMatrix w =
        affinity(metric_sq(features, config, warnings), config.eps_quantile,
                 config.kernel_diagonal);
    return diffusion_map(transition(w), config.diffusion_time, config.d_hat);
}

FusionResult fuse_channels(const Matrix& features_x, const Matrix& features_y,
                           const PipelineConfig& config, WarningLog* warnings) {
    if (features_x.rows() != features_y.rows()) {
        throw DataError("the two channels cover different epoch counts");
    }
    AffinityMatrix wx = affinity(metric_sq(features_x, config, warnings), config.eps_quantile,
                                 config.kernel_diagonal);
    AffinityMatrix wy = affinity(metric_sq(features_y, config, warnings), config.eps_quantile,
                                 config.kernel_diagonal);
    TransitionMatrix ax = transition(wx);
    TransitionMatrix ay = transition(wy);

    FusionResult out;
    Matrix a_xy = alternating_diffusion(ax, ay);
    out.adm = adm_embed(common_metric(a_xy), config.eps_quantile, config.diffusion_time,
                        config.d_hat, config.kernel_diagonal);
    out.cocluster = cocluster_eigvecs(multiview_operator(wx, wy), config.d_tilde);
    out.common = common_feature(out.adm, out.cocluster, config.d_hat, config.d_tilde);
    return out;
}

namespace {

std::string sanitize(const std::string& name) {
    std::string out;
    for (char c : name) {
        out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    }
    return out;
}

struct StageTimer {
    using clock = std::chrono::steady_clock;
    json timings = json::object();
    clock::time_point mark = clock::now();

    void lap(const std::string& stage) {
        const auto now = clock::now();
        timings[stage] =
            std::chrono::duration_cast<std::chrono::milliseconds>(now - mark).count();
        mark = now;
    }
};

void write_run_manifest(const std::string& path, const PipelineConfig& config,
                        const std::vector<std::string>& inputs,
                        const std::vector<std::string>& outputs, const json& timings) {
    json j;
    j["config"] = json::object();
    for (const auto& [k, v] : config.echo()) j["config"][k] = v;
    j["inputs"] = json::array();
    for (const std::string& p : inputs) {
        char digest[32];
        std::snprintf(digest, sizeof(digest), "%016llx",
                      static_cast<unsigned long long>(file_digest(p)));
        j["inputs"].push_back({{"path", p}, {"fnv1a64", digest}});
    }
    j["outputs"] = outputs;
    j["timings_ms"] = timings;
    write_text_file(path, j.dump(2) + "\n");
}

} // namespace

FeatureFiles cmd_features(const std::string& edf_path, const std::string& hypnogram_path,
                          const std::string& out_prefix, const PipelineConfig& config) {
    StageTimer timer;
    Recording rec = parse_edf_file(edf_path);
    Hypnogram hyp = parse_hypnogram_file(hypnogram_path);
    timer.lap("ingest");

    FeatureResult features = extract_features(rec, hyp, config);
    timer.lap("features");

    FeatureFiles out;
    out.epochs = static_cast<int>(features.stages.size());
    std::vector<std::string> outputs;
    for (size_t c = 0; c < config.channels.size(); ++c) {
        const std::string path = out_prefix + "." + sanitize(config.channels[c]) + ".csv";
        write_feature_csv(path, features.stages, features.per_channel[c]);
        out.per_channel_csv.push_back(path);
        outputs.push_back(path);
    }
    // Epoch ordinals survive exclusion/truncation only in this sidecar.
    {
        const std::string path = out_prefix + ".epochs.csv";
        std::ostringstream ss;
        ss << "epoch_index,stage\n";
        for (size_t i = 0; i < features.stages.size(); ++i) {
            ss << features.epoch_index[i] << "," << features.stages[i] << "\n";
        }
        write_text_file(path, ss.str());
        outputs.push_back(path);
    }
    timer.lap("write");
    write_run_manifest(out_prefix + ".manifest.json", config, {edf_path, hypnogram_path},
                       outputs, timer.timings);
    return out;
}

void cmd_embed(const std::vector<std::string>& feature_csvs, const std::string& out_prefix,
               const PipelineConfig& config) {
    config.validate();
    for (size_t c = 0; c < feature_csvs.size(); ++c) {
        std::vector<int> stages;
        Matrix u;
        read_feature_csv(feature_csvs[c], stages, u);
        Embedding emb = intrinsic_embedding(u, config);
        EpochTable table;
        table.stage = stages;
        table.epoch_index.resize(stages.size());
        for (size_t i = 0; i < stages.size(); ++i) table.epoch_index[i] = static_cast<int>(i);
        table.values = emb.coords;
        write_epoch_csv(out_prefix + ".embed" + std::to_string(c + 1) + ".csv", table, "coord_");
    }
}

void cmd_fuse(const std::vector<std::string>& channel1_csvs,
              const std::vector<std::string>& channel2_csvs,
              const std::vector<std::string>& out_prefixes, const PipelineConfig& config) {
    config.validate();
    if (channel1_csvs.size() != channel2_csvs.size() ||
        channel1_csvs.size() != out_prefixes.size() || channel1_csvs.empty()) {
        throw DataError("fuse needs matching channel-1, channel-2 and output lists");
    }
    StageTimer timer;

    std::vector<std::vector<int>> stages_per_rec;
    std::vector<long> offsets;
    Matrix ux, uy;
    long total = 0;
    for (size_t r = 0; r < channel1_csvs.size(); ++r) {
        std::vector<int> s1, s2;
        Matrix u1, u2;
        read_feature_csv(channel1_csvs[r], s1, u1);
        read_feature_csv(channel2_csvs[r], s2, u2);
        if (s1 != s2) {
            throw DataError("stage sequences differ between channels for recording " +
                            channel1_csvs[r]);
        }
        offsets.push_back(total);
        total += u1.rows();
        ux.conservativeResize(total, u1.cols());
        uy.conservativeResize(total, u2.cols());
        ux.bottomRows(u1.rows()) = u1;
        uy.bottomRows(u2.rows()) = u2;
        stages_per_rec.push_back(std::move(s1));
    }
    timer.lap("read");

    FusionResult fused = fuse_channels(ux, uy, config);
    timer.lap("fuse");

    const long n = fused.common.rows();
    std::vector<std::string> outputs;
    for (size_t r = 0; r < out_prefixes.size(); ++r) {
        const long begin = offsets[r];
        const long rows = static_cast<long>(stages_per_rec[r].size());
        EpochTable table;
        table.stage = stages_per_rec[r];
        table.epoch_index.resize(static_cast<size_t>(rows));
        for (long i = 0; i < rows; ++i) table.epoch_index[static_cast<size_t>(i)] = static_cast<int>(i);

        table.values = fused.common.middleRows(begin, rows);
        write_epoch_csv(out_prefixes[r] + ".common.csv", table, "v_");
        outputs.push_back(out_prefixes[r] + ".common.csv");

        table.values = fused.adm.coords.middleRows(begin, rows);
        write_epoch_csv(out_prefixes[r] + ".adm.csv", table, "psi_");
        outputs.push_back(out_prefixes[r] + ".adm.csv");

        table.values = fused.cocluster.middleRows(begin, rows);
        write_epoch_csv(out_prefixes[r] + ".coclust1.csv", table, "q_");
        outputs.push_back(out_prefixes[r] + ".coclust1.csv");

        table.values = fused.cocluster.middleRows(n + begin, rows);
        write_epoch_csv(out_prefixes[r] + ".coclust2.csv", table, "q_");
        outputs.push_back(out_prefixes[r] + ".coclust2.csv");
    }
    timer.lap("write");

    std::vector<std::string> inputs = channel1_csvs;
    inputs.insert(inputs.end(), channel2_csvs.begin(), channel2_csvs.end());
    write_run_manifest(out_prefixes.front() + ".manifest.json", config, inputs, outputs,
                       timer.timings);
}

void save_model(const std::string& path, const HmmModel& model, const PipelineConfig& config) {
    json j;
    j["format"] = "sleepgeo-hmm-1";
    j["config"] = json::object();
    for (const auto& [k, v] : config.echo()) j["config"][k] = v;
    auto matrix_to_json = [](const Matrix& m) {
        json rows = json::array();
        for (long r = 0; r < m.rows(); ++r) {
            json row = json::array();
            for (long c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
            rows.push_back(std::move(row));
        }
        return rows;
    };
    j["codebook"] = matrix_to_json(model.codebook.centroids);
    j["transition"] = matrix_to_json(model.transition);
    j["emission"] = matrix_to_json(model.emission);
    write_text_file(path, j.dump(2) + "\n");
}

HmmModel load_model(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ParseError("model file " + path + ": " + e.what());
    }
    if (j.value("format", "") != "sleepgeo-hmm-1") {
        throw ParseError("model file " + path + " has an unknown format tag");
    }
    auto matrix_from_json = [&](const json& rows) {
        if (!rows.is_array() || rows.empty()) throw ParseError(path + ": bad matrix");
        Matrix m(static_cast<long>(rows.size()), static_cast<long>(rows[0].size()));
        for (long r = 0; r < m.rows(); ++r) {
            for (long c = 0; c < m.cols(); ++c) m(r, c) = rows[static_cast<size_t>(r)][static_cast<size_t>(c)].get<double>();
        }
        return m;
    };
    HmmModel model;
    model.codebook.centroids = matrix_from_json(j.at("codebook"));
    model.transition = matrix_from_json(j.at("transition"));
    model.emission = matrix_from_json(j.at("emission"));
    return model;
}

void cmd_train(const std::vector<std::string>& common_csvs, const std::string& model_path,
               const PipelineConfig& config) {
    config.validate();
    if (common_csvs.empty()) throw DataError("train needs at least one common-feature CSV");
    std::vector<SubjectRecord> subjects;
    for (const std::string& path : common_csvs) {
        EpochTable table = read_epoch_csv(path);
        SubjectRecord s;
        s.id = path;
        NightRecord night;
        night.stages = table.stage;
        night.features = table.values;
        s.nights.push_back(std::move(night));
        subjects.push_back(std::move(s));
    }
    std::vector<const SubjectRecord*> training;
    for (const SubjectRecord& s : subjects) training.push_back(&s);
    HmmModel model = train_fold_model(training, config.eval_config(), config.seed);
    save_model(model_path, model, config);
}

void cmd_predict(const std::string& model_path, const std::string& common_csv,
                 const std::string& out_csv) {
    HmmModel model = load_model(model_path);
    EpochTable table = read_epoch_csv(common_csv);
    const std::vector<int> symbols = quantize_all(model.codebook, table.values);
    const std::vector<int> path = viterbi(model, symbols).path;

    std::ostringstream ss;
    ss << "epoch,truth,pred\n";
    for (size_t i = 0; i < path.size(); ++i) {
        ss << table.epoch_index[i] << "," << table.stage[i] << "," << path[i] << "\n";
    }
    write_text_file(out_csv, ss.str());
}

std::vector<SubjectRecord> load_dataset_manifest(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ParseError("dataset manifest " + path + ": " + e.what());
    }
    if (!j.contains("subjects") || !j["subjects"].is_array()) {
        throw ParseError("dataset manifest " + path + " lacks a 'subjects' array");
    }
    const fs::path base = fs::path(path).parent_path();
    std::vector<SubjectRecord> dataset;
    for (const json& js : j["subjects"]) {
        SubjectRecord s;
        s.id = js.at("id").get<std::string>();
        s.age = js.at("age").get<double>();
        for (const json& night_path : js.at("nights")) {
            fs::path p = night_path.get<std::string>();
            if (p.is_relative()) p = base / p;
            EpochTable table = read_epoch_csv(p.string());
            NightRecord night;
            night.stages = table.stage;
            night.features = table.values;
            s.nights.push_back(std::move(night));
        }
        if (s.nights.empty()) throw DataError("subject " + s.id + " has no nights");
        dataset.push_back(std::move(s));
    }
    return dataset;
}

std::string render_report(const EvalReport& report, const PipelineConfig& config) {
    std::ostringstream ss;
    ss << "sleepgeo evaluation report\n";
    ss << "scheme = " << (config.folds == 0 ? "losocv" : std::to_string(config.folds) + "-fold")
       << "\n";
    ss << "seed = " << report.seed << "\n\n";
    ss << "config:\n";
    for (const auto& [k, v] : config.echo()) ss << "  " << k << " = " << v << "\n";

    ss << "\npooled confusion matrix (rows = expert, cols = predicted):\n";
    ss << "           Awake     REM      N1      N2      N3\n";
    const char* names[kNumStages] = {"Awake", "REM", "N1", "N2", "N3"};
    for (int p = 0; p < kNumStages; ++p) {
        char line[256];
        std::snprintf(line, sizeof(line), "%-7s %8lld %7lld %7lld %7lld %7lld\n", names[p],
                      report.pooled.m(p, 0), report.pooled.m(p, 1), report.pooled.m(p, 2),
                      report.pooled.m(p, 3), report.pooled.m(p, 4));
        ss << line;
    }

    const MetricsReport& m = report.pooled_metrics;
    ss << "\npooled metrics:\n";
    ss << "  accuracy = " << format_double(m.accuracy) << "\n";
    ss << "  macro_f1 = " << format_double(m.macro_f1) << "\n";
    ss << "  kappa = " << format_double(m.kappa) << "\n";
    ss << "  expected_accuracy = " << format_double(m.expected_accuracy) << "\n";
    ss << "  per-class (precision / recall / f1):\n";
    for (int p = 0; p < kNumStages; ++p) {
        const ClassMetrics& c = m.per_class[static_cast<size_t>(p)];
        ss << "    " << names[p] << ": ";
        if (!c.defined) {
            ss << "undefined (class absent)\n";
            continue;
        }
        ss << format_double(c.precision) << " / " << format_double(c.recall) << " / "
           << format_double(c.f1) << "\n";
    }

    ss << "\nper-night mean +- sd over " << report.nights.size() << " night(s):\n";
    ss << "  accuracy = " << format_double(report.accuracy_per_night.mean) << " +- "
       << format_double(report.accuracy_per_night.stddev) << "\n";
    ss << "  macro_f1 = " << format_double(report.macro_f1_per_night.mean) << " +- "
       << format_double(report.macro_f1_per_night.stddev) << "\n";
    ss << "  kappa = " << format_double(report.kappa_per_night.mean) << " +- "
       << format_double(report.kappa_per_night.stddev) << "\n";

    ss << "\nnights:\n";
    for (const NightOutcome& n : report.nights) {
        ss << "  " << n.subject_id << " night " << n.night_index
           << ": accuracy = " << format_double(n.metrics.accuracy)
           << ", macro_f1 = " << format_double(n.metrics.macro_f1)
           << ", kappa = " << format_double(n.metrics.kappa) << "\n";
    }
    return ss.str();
}

EvalReport cmd_evaluate(const std::string& manifest_path, const std::string& out_prefix,
                        const PipelineConfig& config) {
    config.validate();
    StageTimer timer;
    std::vector<SubjectRecord> dataset = load_dataset_manifest(manifest_path);
    timer.lap("read");

    EvalReport report = config.folds == 0 ? losocv(dataset, config.eval_config())
                                          : kfold(dataset, config.folds, config.eval_config());
    timer.lap("evaluate");

    std::vector<std::string> outputs;
    const std::string report_path = out_prefix + ".report.txt";
    write_text_file(report_path, render_report(report, config));
    outputs.push_back(report_path);

    {
        std::ostringstream ss;
        ss << "truth\\pred,Awake,REM,N1,N2,N3\n";
        const char* names[kNumStages] = {"Awake", "REM", "N1", "N2", "N3"};
        for (int p = 0; p < kNumStages; ++p) {
            ss << names[p];
            for (int q = 0; q < kNumStages; ++q) ss << "," << report.pooled.m(p, q);
            ss << "\n";
        }
        const std::string path = out_prefix + ".pooled_confusion.csv";
        write_text_file(path, ss.str());
        outputs.push_back(path);
    }

    for (const NightOutcome& n : report.nights) {
        std::ostringstream ss;
        ss << "epoch,truth,pred\n";
        for (size_t t = 0; t < n.truth.size(); ++t) {
            ss << t << "," << n.truth[t] << "," << n.predicted[t] << "\n";
        }
        const std::string path = out_prefix + "." + sanitize(n.subject_id) + ".n" +
                                 std::to_string(n.night_index) + ".hypnogram.csv";
        write_text_file(path, ss.str());
        outputs.push_back(path);
    }
    timer.lap("write");
    write_run_manifest(out_prefix + ".manifest.json", config, {manifest_path}, outputs,
                       timer.timings);
    return report;
}

void cmd_export(const std::string& edf_path, const std::string& channel,
                const std::string& out_prefix, long sample_begin, long sample_end,
                const PipelineConfig& config) {
    config.validate();
    Recording rec = parse_edf_file(edf_path);
    const Channel& ch = rec.channel(channel);
    if (sample_end < 0) sample_end = static_cast<long>(ch.samples.size());
    if (sample_begin < 0 || sample_begin >= sample_end ||
        sample_end > static_cast<long>(ch.samples.size())) {
        throw DataError("export sample range out of bounds");
    }

    const SstParams sst = config.sst_params();
    StftGrid vh = stft(ch.samples, sst, WindowKind::Gaussian, static_cast<int>(sample_begin),
                       static_cast<int>(sample_end));
    StftGrid vdh = stft(ch.samples, sst, WindowKind::GaussianDerivative,
                        static_cast<int>(sample_begin), static_cast<int>(sample_end));
    SynchroSpectrum s = synchrosqueeze(vh, vdh, sst.discard_rel);
    write_matrix_binary(out_prefix + ".sst.bin", s.values);

    json meta;
    meta["channel"] = channel;
    meta["tau"] = config.tau;
    meta["num_bins"] = config.num_bins;
    meta["stored_bins"] = s.bins();
    meta["bin_hz"] = 1.0 / (config.tau * config.num_bins);
    meta["sample_begin"] = sample_begin;
    meta["sample_end"] = sample_end;
    write_text_file(out_prefix + ".sst.json", meta.dump(2) + "\n");
}

} // namespace sleepgeo
