#include "sleepgeo/sst.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

namespace sleepgeo {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

void check_finite(std::span<const double> signal) {
    for (double v : signal) {
        if (!std::isfinite(v)) throw DataError("signal contains non-finite samples");
    }
}

// Shared reassignment walk over one time frame. emit(k, target) is called
// for every stored bin; target is the real-valued reassigned bin index or
// -inf for discarded entries. Both the materialized and the streaming
// spectra go through this single code path.
template <typename F>
void reassign_frame(const std::complex<double>* vh, const std::complex<double>* vdh, int bins,
                    double scale, double discard_rel, F&& emit) {
    double frame_max = 0.0;
    for (int k = 0; k < bins; ++k) frame_max = std::max(frame_max, std::abs(vh[k]));
    const double floor_abs = discard_rel * frame_max;
    for (int k = 0; k < bins; ++k) {
        const double mag = std::abs(vh[k]);
        if (mag == 0.0 || mag < floor_abs) {
            emit(k, kNegInf);
            continue;
        }
        const std::complex<double> ratio = vdh[k] / vh[k];
        emit(k, static_cast<double>(k) - scale * ratio.imag());
    }
}

} // namespace

double window_value(WindowKind kind, double z) {
    const double g = std::exp(-0.5 * z * z);
    return kind == WindowKind::Gaussian ? g : -z * g;
}

int SstParams::effective_stored_bins() const {
    if (stored_bins < 0) return num_bins;
    return std::min(stored_bins, num_bins);
}

double SstParams::effective_sigma() const {
    if (window_sigma > 0.0) return window_sigma;
    return static_cast<double>(window_len - 1) / 10.0;
}

int SstParams::bins_covering(double f_max_hz, double tau, int num_bins, int guard_bins) {
    int k = static_cast<int>(std::ceil(f_max_hz * tau * static_cast<double>(num_bins)));
    return std::min(num_bins, k + 1 + guard_bins);
}

void SstParams::validate() const {
    if (tau <= 0) throw DataError("tau must be positive");
    if (window_len < 1 || window_len % 2 == 0) {
        throw DataError("window length H must be a positive odd sample count, got " +
                        std::to_string(window_len));
    }
    if (num_bins < window_len) {
        throw DataError("num_bins K = " + std::to_string(num_bins) +
                        " is smaller than the window length " + std::to_string(window_len));
    }
    if (discard_rel < 0) throw DataError("discard_rel must be nonnegative");
    if (window_sigma < 0) throw DataError("window_sigma must be nonnegative");
}

BandSet BandSet::standard_eeg() {
    BandSet s;
    s.bands = {{0.5, 4.0}, {4.0, 7.0},  {7.0, 12.0}, {12.0, 16.0}, {16.0, 20.0},
               {20.0, 24.0}, {24.0, 28.0}, {28.0, 31.0}, {31.0, 49.0}};
    s.total_lo_hz = 0.5;
    s.total_hi_hz = 49.0;
    return s;
}

struct SstEngine::Impl {
    SstParams params;
    std::vector<double> win_h;  // (1/H) h(r/H) for r in [-half, half]
    std::vector<double> win_dh; // (1/H) Dh(r/H)
    fftw_complex* in = nullptr;
    fftw_complex* out = nullptr;
    fftw_plan plan = nullptr;

    explicit Impl(const SstParams& p) : params(p) {
        params.validate();
        const int half = (params.window_len - 1) / 2;
        win_h.resize(static_cast<size_t>(params.window_len));
        win_dh.resize(static_cast<size_t>(params.window_len));
        const double inv_h = 1.0 / static_cast<double>(params.window_len);
        const double inv_sigma = 1.0 / params.effective_sigma();
        for (int r = -half; r <= half; ++r) {
            const double z = static_cast<double>(r) * inv_sigma;
            win_h[static_cast<size_t>(r + half)] = inv_h * window_value(WindowKind::Gaussian, z);
            win_dh[static_cast<size_t>(r + half)] =
                inv_h * window_value(WindowKind::GaussianDerivative, z);
        }
        in = fftw_alloc_complex(static_cast<size_t>(params.num_bins));
        out = fftw_alloc_complex(static_cast<size_t>(params.num_bins));
        if (in == nullptr || out == nullptr) throw std::bad_alloc();
        {
            std::lock_guard<std::mutex> lock(fftw_planner_mutex());
            plan = fftw_plan_dft_1d(params.num_bins, in, out, FFTW_FORWARD, FFTW_ESTIMATE);
        }
        if (plan == nullptr) throw NumericError("FFTW failed to build a plan");
    }

    ~Impl() {
        if (plan != nullptr) {
            std::lock_guard<std::mutex> lock(fftw_planner_mutex());
            fftw_destroy_plan(plan);
        }
        fftw_free(in);
        fftw_free(out);
    }
};

SstEngine::SstEngine(const SstParams& params) : impl_(std::make_unique<Impl>(params)) {}
SstEngine::~SstEngine() = default;
SstEngine::SstEngine(SstEngine&&) noexcept = default;
SstEngine& SstEngine::operator=(SstEngine&&) noexcept = default;

const SstParams& SstEngine::params() const { return impl_->params; }

void SstEngine::stft_column(std::span<const double> signal, int time_index, WindowKind kind,
                            Eigen::VectorXcd& out) const {
    const SstParams& p = impl_->params;
    const int half = (p.window_len - 1) / 2;
    const int K = p.num_bins;
    const long n = static_cast<long>(signal.size());

    for (int m = 0; m < K; ++m) {
        impl_->in[m][0] = 0.0;
        impl_->in[m][1] = 0.0;
    }
    const std::vector<double>& win = kind == WindowKind::Gaussian ? impl_->win_h : impl_->win_dh;
    for (int r = -half; r <= half; ++r) {
        const long m = static_cast<long>(time_index) + r;
        if (m < 0 || m >= n) continue; // zero padding outside the signal
        const int slot = r >= 0 ? r : K + r;
        impl_->in[slot][0] = signal[static_cast<size_t>(m)] * win[static_cast<size_t>(r + half)];
    }
    fftw_execute(impl_->plan);

    const int stored = p.effective_stored_bins();
    out.resize(stored);
    for (int k = 0; k < stored; ++k) {
        out[k] = std::complex<double>(impl_->out[k][0], impl_->out[k][1]);
    }
}

StftGrid stft(std::span<const double> signal, const SstParams& params, WindowKind kind,
              int time_begin, int time_end) {
    params.validate();
    check_finite(signal);
    if (time_end < 0) time_end = static_cast<int>(signal.size());
    if (time_end < time_begin) throw DataError("time_end precedes time_begin");

    SstEngine engine(params);
    StftGrid grid;
    grid.window_len = params.window_len;
    grid.window_sigma = params.effective_sigma();
    grid.num_bins = params.num_bins;
    grid.tau = params.tau;
    grid.time_begin = time_begin;
    grid.values.resize(time_end - time_begin, params.effective_stored_bins());

    Eigen::VectorXcd column;
    for (int j = time_begin; j < time_end; ++j) {
        engine.stft_column(signal, j, kind, column);
        grid.values.row(j - time_begin) = column.transpose();
    }
    return grid;
}

namespace {

void check_compatible(const StftGrid& vh, const StftGrid& vdh) {
    if (vh.values.rows() != vdh.values.rows() || vh.values.cols() != vdh.values.cols() ||
        vh.num_bins != vdh.num_bins || vh.window_len != vdh.window_len ||
        vh.window_sigma != vdh.window_sigma) {
        throw DataError("STFT grid shapes/parameters differ between the two windows");
    }
}

} // namespace

RealGrid reassign_freq(const StftGrid& vh, const StftGrid& vdh, double discard_rel) {
    check_compatible(vh, vdh);
    const double scale = static_cast<double>(vh.num_bins) / (2.0 * M_PI * vh.window_sigma);
    RealGrid omega(vh.values.rows(), vh.values.cols());
    const int bins = vh.bins();
    for (int j = 0; j < vh.times(); ++j) {
        reassign_frame(vh.values.data() + static_cast<long>(j) * bins,
                       vdh.values.data() + static_cast<long>(j) * bins, bins, scale, discard_rel,
                       [&](int k, double target) { omega(j, k) = target; });
    }
    return omega;
}

SynchroSpectrum synchrosqueeze(const StftGrid& vh, const StftGrid& vdh, double discard_rel) {
    check_compatible(vh, vdh);
    const double scale = static_cast<double>(vh.num_bins) / (2.0 * M_PI * vh.window_sigma);
    SynchroSpectrum s;
    s.num_bins = vh.num_bins;
    s.tau = vh.tau;
    s.values = RealGrid::Zero(vh.values.rows(), vh.values.cols());
    const int bins = vh.bins();
    for (int j = 0; j < vh.times(); ++j) {
        const std::complex<double>* vh_row = vh.values.data() + static_cast<long>(j) * bins;
        const std::complex<double>* vdh_row = vdh.values.data() + static_cast<long>(j) * bins;
        reassign_frame(vh_row, vdh_row, bins, scale, discard_rel, [&](int k, double target) {
            if (target == kNegInf) return;
            const double khat_real = std::floor(target + 0.5); // unit bin [khat-1/2, khat+1/2)
            if (khat_real < 0 || khat_real >= static_cast<double>(bins)) return;
            const int khat = static_cast<int>(khat_real);
            const double mag = std::abs(vh_row[k]);
            s.values(j, khat) += mag * mag;
        });
    }
    return s;
}

namespace {

// Per-bin band assignment: index into bands, -1 = outside every band.
// Bands are half-open [lo, hi) except the last, which is closed, so the
// union tiles [total_lo, total_hi] without double counting.
std::vector<int> bin_band_ids(const BandSet& bands, double tau, int num_bins, int stored) {
    std::vector<int> ids(static_cast<size_t>(stored), -1);
    for (int k = 0; k < stored; ++k) {
        const double f = static_cast<double>(k) / (tau * static_cast<double>(num_bins));
        for (size_t b = 0; b < bands.bands.size(); ++b) {
            const bool last = b + 1 == bands.bands.size();
            if (f >= bands.bands[b].lo_hz && (last ? f <= bands.bands[b].hi_hz
                                                   : f < bands.bands[b].hi_hz)) {
                ids[static_cast<size_t>(k)] = static_cast<int>(b);
                break;
            }
        }
    }
    return ids;
}

std::vector<bool> bin_in_total(const BandSet& bands, double tau, int num_bins, int stored) {
    std::vector<bool> in(static_cast<size_t>(stored), false);
    for (int k = 0; k < stored; ++k) {
        const double f = static_cast<double>(k) / (tau * static_cast<double>(num_bins));
        in[static_cast<size_t>(k)] = f >= bands.total_lo_hz && f <= bands.total_hi_hz;
    }
    return in;
}

EpochFeature assemble_feature(const std::array<double, 10>& sums, double tau, double epoch_s) {
    EpochFeature f;
    const double total = sums[0] * tau / epoch_s;
    if (total <= 0.0) {
        throw NumericError("silent epoch: zero in-band energy, band ratios undefined");
    }
    f.u[0] = total;
    for (int b = 0; b < 9; ++b) f.u[b + 1] = (sums[static_cast<size_t>(b) + 1] * tau / epoch_s) / total;
    return f;
}

} // namespace

EpochFeature band_features(const SynchroSpectrum& spectrum, const BandSet& bands, double epoch_s) {
    if (bands.bands.size() != 9) throw DataError("expected 9 frequency bands");
    const int stored = spectrum.bins();
    const std::vector<int> ids = bin_band_ids(bands, spectrum.tau, spectrum.num_bins, stored);
    const std::vector<bool> total = bin_in_total(bands, spectrum.tau, spectrum.num_bins, stored);

    std::array<double, 10> sums{};
    for (int j = 0; j < spectrum.times(); ++j) {
        for (int k = 0; k < stored; ++k) {
            const double v = spectrum.values(j, k);
            if (total[static_cast<size_t>(k)]) sums[0] += v;
            const int b = ids[static_cast<size_t>(k)];
            if (b >= 0) sums[static_cast<size_t>(b) + 1] += v;
        }
    }
    return assemble_feature(sums, spectrum.tau, epoch_s);
}

std::vector<EpochFeature> epoch_band_features(std::span<const double> signal,
                                              const SstParams& params, const BandSet& bands,
                                              std::span<const int> epoch_indices, double epoch_s,
                                              int column_stride) {
    params.validate();
    check_finite(signal);
    if (bands.bands.size() != 9) throw DataError("expected 9 frequency bands");
    if (column_stride < 1) throw DataError("column_stride must be >= 1");

    const double exact = epoch_s / params.tau;
    const long spe = std::lround(exact);
    if (spe <= 0 || std::abs(exact - static_cast<double>(spe)) > 1e-9) {
        throw DataError("epoch length is not an integral number of samples at tau = " +
                        std::to_string(params.tau));
    }

    SstEngine engine(params);
    const int stored = params.effective_stored_bins();
    const std::vector<int> ids = bin_band_ids(bands, params.tau, params.num_bins, stored);
    const std::vector<bool> total = bin_in_total(bands, params.tau, params.num_bins, stored);
    const double scale =
        static_cast<double>(params.num_bins) / (2.0 * M_PI * params.effective_sigma());

    std::vector<EpochFeature> features;
    features.reserve(epoch_indices.size());
    Eigen::VectorXcd vh;
    Eigen::VectorXcd vdh;

    for (int e : epoch_indices) {
        const long begin = static_cast<long>(e) * spe;
        if (e < 0 || begin + spe > static_cast<long>(signal.size())) {
            throw DataError("epoch " + std::to_string(e) + " extends past the signal end");
        }
        std::array<double, 10> sums{};
        for (long j = begin; j < begin + spe; j += column_stride) {
            engine.stft_column(signal, static_cast<int>(j), WindowKind::Gaussian, vh);
            engine.stft_column(signal, static_cast<int>(j), WindowKind::GaussianDerivative, vdh);
            reassign_frame(vh.data(), vdh.data(), stored, scale, params.discard_rel,
                           [&](int k, double target) {
                               if (target == kNegInf) return;
                               const double khat_real = std::floor(target + 0.5);
                               if (khat_real < 0 || khat_real >= static_cast<double>(stored))
                                   return;
                               const int khat = static_cast<int>(khat_real);
                               const double mag = std::abs(vh[k]);
                               const double energy = mag * mag;
                               if (total[static_cast<size_t>(khat)]) sums[0] += energy;
                               const int b = ids[static_cast<size_t>(khat)];
                               if (b >= 0) sums[static_cast<size_t>(b) + 1] += energy;
                           });
        }
        // Strided columns approximate the full per-sample sum.
        for (double& v : sums) v *= static_cast<double>(column_stride);
        features.push_back(assemble_feature(sums, params.tau, epoch_s));
    }
    return features;
}

} // namespace sleepgeo
