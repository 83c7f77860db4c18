#include "sleepgeo/hmm.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace sleepgeo;
namespace tst = sleepgeo::testing;

namespace {

Matrix random_rows(int n, int dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix m(n, dim);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < dim; ++j) m(i, j) = gauss(rng);
    }
    return m;
}

Matrix random_stochastic(int rows, int cols, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        double total = 0.0;
        for (int j = 0; j < cols; ++j) {
            m(i, j) = unit(rng);
            total += m(i, j);
        }
        m.row(i) /= total;
    }
    return m;
}

HmmModel random_model(int symbols, std::mt19937_64& rng) {
    HmmModel model;
    model.transition = random_stochastic(kNumStages, kNumStages, rng);
    model.emission = random_stochastic(kNumStages, symbols, rng);
    return model;
}

} // namespace

TEST_SUITE("hmm") {

TEST_CASE("LBG finds the two pair means of a well-separated quartet") {
    Matrix points(4, 2);
    points << 0.0, 0.1,
              0.1, 0.0,
              10.0, 10.1,
              10.1, 10.0;
    Codebook cb = lbg_codebook(points, 2, 1);
    REQUIRE(cb.size() == 2);
    // order-independent comparison against the two pair means
    Vector lo(2), hi(2);
    lo << 0.05, 0.05;
    hi << 10.05, 10.05;
    const bool first_is_lo = (cb.centroids.row(0).transpose() - lo).norm() < 1.0;
    const Vector c0 = cb.centroids.row(first_is_lo ? 0 : 1).transpose();
    const Vector c1 = cb.centroids.row(first_is_lo ? 1 : 0).transpose();
    CHECK((c0 - lo).norm() < 1e-9);
    CHECK((c1 - hi).norm() < 1e-9);
}

TEST_CASE("size-1 codebook is the global mean") {
    Matrix points = random_rows(50, 3, 61);
    Codebook cb = lbg_codebook(points, 1, 0);
    CHECK((cb.centroids.row(0) - points.colwise().mean()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("distortion is monotone in the codebook size") {
    Matrix points = random_rows(256, 4, 62);
    double prev = std::numeric_limits<double>::infinity();
    for (int size : {1, 2, 4, 8, 16, 32}) {
        Codebook cb = lbg_codebook(points, size, 7);
        const double d = codebook_distortion(cb, points);
        CHECK(d <= prev * (1.0 + 1e-12));
        prev = d;
    }
}

TEST_CASE("codebook size must be an attainable power of two") {
    Matrix points = random_rows(10, 2, 63);
    CHECK_THROWS_AS(lbg_codebook(points, 3, 0), DataError);
    CHECK_THROWS_AS(lbg_codebook(points, 16, 0), DataError);
    CHECK_THROWS_AS(lbg_codebook(points, 0, 0), DataError);
}

TEST_CASE("quantization picks the nearest centroid with a lowest-index tie rule") {
    Codebook cb;
    cb.centroids.resize(3, 1);
    cb.centroids << 0.0, 1.0, 5.0;

    Vector v(1);
    v << 1.0;
    CHECK(quantize(cb, v) == 2); // exactly centroid 2

    v << 0.5; // equidistant between centroids 1 and 2
    CHECK(quantize(cb, v) == 1);

    v << std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(quantize(cb, v), DataError);

    // random batch against a brute-force scan
    Matrix batch = random_rows(100, 1, 64);
    std::vector<int> symbols = quantize_all(cb, batch);
    for (int i = 0; i < 100; ++i) {
        int arg = 0;
        double best = std::numeric_limits<double>::infinity();
        for (int c = 0; c < 3; ++c) {
            const double d = std::abs(batch(i, 0) - cb.centroids(c, 0));
            if (d < best) {
                best = d;
                arg = c;
            }
        }
        CHECK(symbols[static_cast<size_t>(i)] == arg + 1);
    }
}

TEST_CASE("transition estimation counts within sequences only") {
    SUBCASE("direct counts without smoothing") {
        std::vector<std::vector<int>> seqs = {{1, 1, 2, 2}};
        Matrix m = estimate_transitions(seqs, 0.0);
        CHECK(m(0, 0) == doctest::Approx(0.5));
        CHECK(m(0, 1) == doctest::Approx(0.5));
        CHECK(m(1, 1) == doctest::Approx(1.0));
    }
    SUBCASE("unseen rows smooth to uniform") {
        std::vector<std::vector<int>> seqs = {{1, 1}};
        Matrix m = estimate_transitions(seqs, 1.0);
        for (int j = 0; j < kNumStages; ++j) {
            CHECK(m(2, j) == doctest::Approx(0.2));
        }
        CHECK(m.minCoeff() > 0.0);
        CHECK((m.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
    }
    SUBCASE("pooling never counts across a sequence boundary") {
        std::vector<std::vector<int>> pooled = {{1, 2, 2}, {3, 4}};
        Matrix m = estimate_transitions(pooled, 0.0);
        CHECK(m(1, 2) == 0.0); // the 2 -> 3 jump spans the boundary
        CHECK(m(1, 1) == doctest::Approx(1.0));
        CHECK(m(0, 1) == doctest::Approx(1.0));
        CHECK(m(2, 3) == doctest::Approx(1.0));

        std::mt19937_64 rng(65);
        std::vector<std::vector<int>> seqs;
        Matrix counts = Matrix::Zero(kNumStages, kNumStages);
        Vector from = Vector::Zero(kNumStages);
        for (int s = 0; s < 4; ++s) {
            std::vector<int> seq;
            for (int t = 0; t < 50; ++t) seq.push_back(1 + static_cast<int>(rng() % 5));
            for (size_t t = 0; t + 1 < seq.size(); ++t) {
                counts(seq[t] - 1, seq[t + 1] - 1) += 1.0;
                from[seq[t] - 1] += 1.0;
            }
            seqs.push_back(std::move(seq));
        }
        Matrix pooled_m = estimate_transitions(seqs, 0.0);
        for (int i = 0; i < kNumStages; ++i) {
            for (int j = 0; j < kNumStages; ++j) {
                const double expect = from[i] > 0 ? counts(i, j) / from[i] : 0.2;
                CHECK(pooled_m(i, j) == doctest::Approx(expect));
            }
        }
    }
}

TEST_CASE("emission estimation counts stage-symbol pairs") {
    SUBCASE("direct counts without smoothing") {
        std::vector<std::vector<int>> stages = {{1, 1}};
        std::vector<std::vector<int>> symbols = {{2, 2}};
        Matrix e = estimate_emissions(stages, symbols, 4, 0.0);
        CHECK(e(0, 1) == doctest::Approx(1.0));
        CHECK(e(0, 0) == 0.0);
    }
    SUBCASE("unseen stages smooth to uniform") {
        std::vector<std::vector<int>> stages = {{1}};
        std::vector<std::vector<int>> symbols = {{1}};
        Matrix e = estimate_emissions(stages, symbols, 4, 1.0);
        for (int k = 0; k < 4; ++k) CHECK(e(4, k) == doctest::Approx(0.25));
        CHECK(e.minCoeff() > 0.0);
    }
    SUBCASE("random instance matches a counting oracle") {
        std::mt19937_64 rng(66);
        std::vector<std::vector<int>> stages(3), symbols(3);
        Matrix counts = Matrix::Zero(kNumStages, 8);
        Vector in_stage = Vector::Zero(kNumStages);
        for (int s = 0; s < 3; ++s) {
            for (int t = 0; t < 40; ++t) {
                const int st = 1 + static_cast<int>(rng() % 5);
                const int sym = 1 + static_cast<int>(rng() % 8);
                stages[static_cast<size_t>(s)].push_back(st);
                symbols[static_cast<size_t>(s)].push_back(sym);
                counts(st - 1, sym - 1) += 1.0;
                in_stage[st - 1] += 1.0;
            }
        }
        Matrix e = estimate_emissions(stages, symbols, 8, 0.0);
        for (int j = 0; j < kNumStages; ++j) {
            for (int k = 0; k < 8; ++k) {
                const double expect = in_stage[j] > 0 ? counts(j, k) / in_stage[j] : 1.0 / 8.0;
                CHECK(e(j, k) == doctest::Approx(expect));
            }
        }
    }
    SUBCASE("misaligned sequences are rejected") {
        std::vector<std::vector<int>> stages = {{1, 2}};
        std::vector<std::vector<int>> symbols = {{1}};
        CHECK_THROWS_AS(estimate_emissions(stages, symbols, 4, 1.0), DataError);
    }
}

TEST_CASE("Viterbi matches exhaustive enumeration on random models") {
    // Dyadic models keep every path probability exact, so optimality and
    // ties can be checked with plain equality.
    std::mt19937_64 rng(67);
    int unique_cases = 0;
    for (int trial = 0; trial < 100; ++trial) {
        HmmModel model;
        model.transition = tst::dyadic_stochastic(kNumStages, kNumStages, rng);
        model.emission = tst::dyadic_stochastic(kNumStages, 3, rng);
        const size_t len = 1 + static_cast<size_t>(rng() % 8);
        std::vector<int> obs(len);
        for (int& o : obs) o = 1 + static_cast<int>(rng() % 3);

        ViterbiTrace trace = viterbi(model, obs);
        tst::ExhaustiveDecode oracle = tst::viterbi_exhaustive(model, obs);

        // The decoded path attains the exhaustive maximum exactly.
        CHECK(tst::hmm_path_probability(model, trace.path, obs) == oracle.probability);
        CHECK(std::exp(trace.log_prob) == doctest::Approx(oracle.probability).epsilon(1e-9));
        if (oracle.optimal_count == 1) {
            ++unique_cases;
            CHECK(trace.path == oracle.path);
        }
    }
    CHECK(unique_cases >= 50); // path identity is exercised on most trials
}

TEST_CASE("uninformative emissions reduce to the pure transition chain") {
    std::mt19937_64 rng(68);
    HmmModel model = random_model(1, rng);
    model.emission = Matrix::Ones(kNumStages, 1); // |O| = 1
    std::vector<int> obs(6, 1);
    ViterbiTrace trace = viterbi(model, obs);

    // oracle: most probable pure transition chain from Awake
    tst::ExhaustiveDecode oracle = tst::viterbi_exhaustive(model, obs);
    CHECK(trace.path == oracle.path);
}

TEST_CASE("deterministic models decode their unique path") {
    HmmModel model;
    model.transition = Matrix::Zero(kNumStages, kNumStages);
    // permutation: 1->2->3->4->5->1
    for (int i = 0; i < kNumStages; ++i) model.transition(i, (i + 1) % kNumStages) = 1.0;
    model.emission = Matrix::Zero(kNumStages, kNumStages);
    for (int i = 0; i < kNumStages; ++i) model.emission(i, i) = 1.0; // state j emits symbol j

    std::vector<int> obs = {2, 3, 4, 5, 1};
    ViterbiTrace trace = viterbi(model, obs);
    CHECK(trace.path == std::vector<int>({2, 3, 4, 5, 1}));
    CHECK(std::exp(trace.log_prob) == doctest::Approx(1.0));
}

TEST_CASE("log-domain table matches the linear-domain DP") {
    std::mt19937_64 rng(69);
    for (int trial = 0; trial < 10; ++trial) {
        HmmModel model = random_model(4, rng);
        std::vector<int> obs(7);
        for (int& o : obs) o = 1 + static_cast<int>(rng() % 4);
        ViterbiTrace trace = viterbi(model, obs);
        Matrix linear = tst::viterbi_linear_table(model, obs);
        for (int j = 0; j < kNumStages; ++j) {
            for (int t = 0; t < 7; ++t) {
                CHECK(std::exp(trace.nu(j, t)) ==
                      doctest::Approx(linear(j, t)).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("empty observations and out-of-range symbols are rejected") {
    std::mt19937_64 rng(70);
    HmmModel model = random_model(3, rng);
    CHECK_THROWS_AS(viterbi(model, std::vector<int>{}), DataError);
    CHECK_THROWS_AS(viterbi(model, std::vector<int>{4}), DataError);
    CHECK_THROWS_AS(viterbi(model, std::vector<int>{0}), DataError);
}

} // TEST_SUITE
