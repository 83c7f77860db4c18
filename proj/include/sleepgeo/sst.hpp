#ifndef SLEEPGEO_SST_HPP
#define SLEEPGEO_SST_HPP

#include "sleepgeo/types.hpp"

#include <memory>
#include <span>

namespace sleepgeo {

// Analysis window: truncated standard Gaussian h(z) = exp(-z^2/2) on
// z in [-(H-1)/(2H), (H-1)/(2H)], or its derivative Dh(z) = -z exp(-z^2/2).
enum class WindowKind { Gaussian, GaussianDerivative };

double window_value(WindowKind kind, double z);

struct SstParams {
    double tau = 0.01;   // seconds per sample
    int window_len = 1001; // H, odd number of samples
    int num_bins = 4004;   // K, FFT length; bin k <-> k/(tau*K) Hz
    // Gaussian standard deviation in samples; 0 = auto, (H-1)/10, i.e. the
    // window support spans +-5 sigma. The reassignment rule's derivation
    // needs the window to decay to ~0 inside its support, so sigma must be
    // well below the half-length. Setting sigma = H reproduces the
    // degenerate near-rectangular window verbatim from the discrete
    // formulas, which barely reassigns; see the tests.
    double window_sigma = 0.0;
    // Number of leading frequency bins kept in grids and spectra
    // (-1 = all K). The analysis range plus guard bins is enough for the
    // reassignment; capping bounds memory on long recordings.
    int stored_bins = -1;
    // Reassignment entries with |V_h| below this fraction of the column
    // maximum are discarded (the discrete stand-in for the -inf branch of
    // the reassignment rule).
    double discard_rel = 1e-12;
    int guard_bins = 16;

    int effective_stored_bins() const;
    double effective_sigma() const; // window_sigma, or the +-5 sigma default
    // Smallest stored-bin count that covers [0, f_max_hz] plus guard bins.
    static int bins_covering(double f_max_hz, double tau, int num_bins, int guard_bins);
    double bin_to_hz(double bin) const { return bin / (tau * num_bins); }
    void validate() const;
};

// Time frames are stored contiguously (row-major, rows = time).
using ComplexGrid =
    Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RealGrid = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Short-time Fourier transform samples on an integer time grid:
//   V(j,k) = sum_r x[j+r] (1/H) h(r/sigma) exp(-i 2 pi k r / K),
// r over [-(H-1)/2, (H-1)/2], the signal zero-padded outside its support.
struct StftGrid {
    ComplexGrid values; // (time rows) x (stored bins)
    int window_len = 0;
    double window_sigma = 0.0; // samples
    int num_bins = 0;
    double tau = 0.0;
    int time_begin = 0; // absolute sample index of row 0

    int times() const { return static_cast<int>(values.rows()); }
    int bins() const { return static_cast<int>(values.cols()); }
};

// Synchrosqueezed spectrogram: per time frame, |V_h|^2 mass reallocated to
// the unit bin around each entry's reassigned frequency.
struct SynchroSpectrum {
    RealGrid values; // (time rows) x (stored bins), nonnegative
    int num_bins = 0;
    double tau = 0.0;

    int times() const { return static_cast<int>(values.rows()); }
    int bins() const { return static_cast<int>(values.cols()); }
};

// 10-dim spectral feature of one epoch: u[0] = total in-band energy,
// u[1..9] = band power ratios.
struct EpochFeature {
    Eigen::Matrix<double, 10, 1> u;
};

struct Band {
    double lo_hz;
    double hi_hz;
};

struct BandSet {
    std::vector<Band> bands;   // contiguous, non-overlapping interiors
    double total_lo_hz = 0.5;  // in-band range for the total energy
    double total_hi_hz = 49.0;

    static BandSet standard_eeg(); // delta .. low gamma, 9 bands
};

// One FFT plan + frame buffer; reusable across columns. Not thread-safe;
// use one per thread.
class SstEngine {
  public:
    explicit SstEngine(const SstParams& params);
    ~SstEngine();
    SstEngine(SstEngine&&) noexcept;
    SstEngine& operator=(SstEngine&&) noexcept;
    SstEngine(const SstEngine&) = delete;
    SstEngine& operator=(const SstEngine&) = delete;

    const SstParams& params() const;

    // One STFT column at sample index time_index; out receives
    // effective_stored_bins() complex values.
    void stft_column(std::span<const double> signal, int time_index, WindowKind kind,
                     Eigen::VectorXcd& out) const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Full grids over [time_begin, time_end). Columns are independent; results
// do not depend on evaluation order.
StftGrid stft(std::span<const double> signal, const SstParams& params,
              WindowKind kind = WindowKind::Gaussian, int time_begin = 0, int time_end = -1);

// Reassigned (real-valued) bin index per entry:
//   k - (K / (2 pi sigma)) * Im(V_dh(j,k) / V_h(j,k)),
// -inf where the entry is discarded (zero magnitude, or below discard_rel
// of the frame maximum).
RealGrid reassign_freq(const StftGrid& vh, const StftGrid& vdh, double discard_rel = 1e-12);

SynchroSpectrum synchrosqueeze(const StftGrid& vh, const StftGrid& vdh,
                               double discard_rel = 1e-12);

// Feature of one epoch whose columns make up the whole spectrum argument.
EpochFeature band_features(const SynchroSpectrum& spectrum, const BandSet& bands,
                           double epoch_s = 30.0);

// Streaming per-epoch features over a whole signal; columns are never
// materialized. column_stride > 1 subsamples the 30/tau columns of each
// epoch (an approximation for long recordings; 1 = exact).
std::vector<EpochFeature> epoch_band_features(std::span<const double> signal,
                                              const SstParams& params, const BandSet& bands,
                                              std::span<const int> epoch_indices,
                                              double epoch_s = 30.0, int column_stride = 1);

} // namespace sleepgeo

#endif
