#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "wavesim/errors.hpp"
#include "wavesim/sparam.hpp"

using namespace wavesim;
namespace fs = std::filesystem;

namespace {

std::mt19937 rng(777);

complex random_complex(double scale = 1.0) {
    std::uniform_real_distribution<double> d(-scale, scale);
    return {d(rng), d(rng)};
}

bool close(complex x, complex y, double tol = 1e-12) {
    return std::abs(x - y) <= tol;
}

fs::path fixture(const std::string& name) {
    return fs::path(WAVESIM_TEST_DIR) / "fixtures" / name;
}

fs::path temp_file(const std::string& name) {
    return fs::temp_directory_path() / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("apply: identity and through networks") {
    smatrix id(2);
    id(0, 0) = id(1, 1) = 1.0;
    auto b = id.apply({complex(1.5, -2.0), complex(0.25, 3.0)});
    CHECK(b[0] == complex(1.5, -2.0));
    CHECK(b[1] == complex(0.25, 3.0));

    smatrix through(2);
    through(0, 1) = through(1, 0) = 1.0;
    b = through.apply({complex(1.5, -2.0), complex(0.25, 3.0)});
    CHECK(b[0] == complex(0.25, 3.0));
    CHECK(b[1] == complex(1.5, -2.0));
}

TEST_CASE("apply: splitter drive matches the hand product") {
    auto s = gen_directional_coupler(0.5, 0.0, 0.0);
    auto b = s.apply({complex(1.0, 0.0), {}, {}, {}});
    CHECK(close(b[0], 0.0));
    CHECK(close(b[1], 0.0));
    CHECK(close(b[2], std::sqrt(0.5)));
    CHECK(close(b[3], complex(0.0, std::sqrt(0.5))));
}

TEST_CASE("apply: agrees with a naive double loop") {
    for (int n : {1, 3, 5}) {
        Eigen::MatrixXcd m(n, n);
        std::vector<complex> a(n);
        for (int i = 0; i < n; ++i) {
            a[i] = random_complex();
            for (int j = 0; j < n; ++j)
                m(i, j) = random_complex();
        }
        auto b = smatrix(m).apply(a);
        for (int i = 0; i < n; ++i) {
            complex acc = 0.0;
            for (int j = 0; j < n; ++j)
                acc += m(i, j) * a[j];
            CHECK(close(b[i], acc));
        }
    }
    CHECK_THROWS_AS(smatrix(2).apply({complex(1.0, 0.0)}), validation_error);
}

TEST_CASE("interpolate: exact at knots, linear between") {
    sparam_table t;
    t.ports = 2;
    t.wavelengths = {1.5e-6, 1.6e-6};
    t.matrices.emplace_back(2);
    t.matrices.emplace_back(Eigen::MatrixXcd::Identity(2, 2).eval());

    auto at0 = interpolate(t, 1.5e-6);
    auto at1 = interpolate(t, 1.6e-6);
    CHECK(at0(0, 0) == complex(0.0, 0.0));
    CHECK(at1(0, 0) == complex(1.0, 0.0));

    auto mid = interpolate(t, 1.55e-6);
    CHECK(close(mid(0, 0), 0.5));
    CHECK(close(mid(1, 1), 0.5));
    CHECK(close(mid(0, 1), 0.0));

    CHECK_THROWS_AS(interpolate(t, 1.4e-6), validation_error);
    CHECK_THROWS_AS(interpolate(t, 1.7e-6), validation_error);
}

TEST_CASE("interpolate: dense waveguide table tracks the generator") {
    const double L = 15e-6, n_eff0 = 2.4, ng = 4.2, lam0 = 1.55e-6, loss = 2.0;
    sparam_table t;
    t.ports = 2;
    const double lo = 1.54e-6, hi = 1.56e-6;
    const int pts = 2001; // 10 pm spacing over a 20 nm span
    for (int k = 0; k < pts; ++k) {
        double wl = lo + (hi - lo) * k / (pts - 1);
        t.wavelengths.push_back(wl);
        t.matrices.push_back(gen_waveguide(L, n_eff0, ng, lam0, loss, wl));
    }
    std::uniform_real_distribution<double> pick(lo, hi);
    for (int k = 0; k < 200; ++k) {
        double wl = pick(rng);
        auto a = interpolate(t, wl);
        auto b = gen_waveguide(L, n_eff0, ng, lam0, loss, wl);
        CHECK(std::abs(a(1, 0) - b(1, 0)) <= 1e-6);
        CHECK(std::abs(a(0, 1) - b(0, 1)) <= 1e-6);
    }
}

TEST_CASE("interpolate: entries stay inside the bracketing rectangle") {
    for (int trial = 0; trial < 50; ++trial) {
        sparam_table t;
        t.ports = 2;
        t.wavelengths = {1.0e-6, 2.0e-6};
        Eigen::MatrixXcd m0(2, 2), m1(2, 2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                m0(i, j) = random_complex();
                m1(i, j) = random_complex();
            }
        t.matrices.emplace_back(m0);
        t.matrices.emplace_back(m1);
        std::uniform_real_distribution<double> pick(1.0e-6, 2.0e-6);
        double wl = pick(rng);
        auto s = interpolate(t, wl);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                CHECK(s(i, j).real() >= std::min(m0(i, j).real(), m1(i, j).real()) - 1e-15);
                CHECK(s(i, j).real() <= std::max(m0(i, j).real(), m1(i, j).real()) + 1e-15);
                CHECK(s(i, j).imag() >= std::min(m0(i, j).imag(), m1(i, j).imag()) - 1e-15);
                CHECK(s(i, j).imag() <= std::max(m0(i, j).imag(), m1(i, j).imag()) + 1e-15);
            }
    }
}

TEST_CASE("table file: fixture loads with expected shape") {
    auto t = load_table(fixture("two_port_3pt.sparam").string());
    CHECK(t.ports == 2);
    CHECK(t.wavelengths.size() == 3);
    CHECK(t.wavelengths[1] == 1.55e-6);
    CHECK(t.matrices[1](0, 1) == complex(0.70710678118654746, 0.0));
    CHECK(t.matrices[2](0, 1) == complex(0.0, -0.9));
}

TEST_CASE("table file: save/load is value-exact and canonical save is idempotent") {
    sparam_table t;
    t.ports = 3;
    t.wavelengths = {1.5e-6, 1.55e-6, 1.6e-6, 1.65e-6};
    for (size_t k = 0; k < t.wavelengths.size(); ++k) {
        Eigen::MatrixXcd m(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                m(i, j) = random_complex();
        t.matrices.emplace_back(m);
    }
    auto p1 = temp_file("wavesim_roundtrip_1.sparam");
    auto p2 = temp_file("wavesim_roundtrip_2.sparam");
    save_table(t, p1.string());
    auto back = load_table(p1.string());
    REQUIRE(back.ports == t.ports);
    REQUIRE(back.wavelengths == t.wavelengths);
    for (size_t k = 0; k < t.matrices.size(); ++k)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(back.matrices[k](i, j) == t.matrices[k](i, j));

    save_table(back, p2.string());
    CHECK(slurp(p1) == slurp(p2));
    fs::remove(p1);
    fs::remove(p2);
}

TEST_CASE("table file: malformed inputs report the offending line") {
    auto write_and_load = [](const std::string& name, const std::string& text) {
        auto p = temp_file(name);
        std::ofstream(p) << text;
        auto guard = p.string();
        try {
            load_table(guard);
        } catch (...) {
            fs::remove(p);
            throw;
        }
        fs::remove(p);
    };

    CHECK_THROWS_WITH_AS(
        write_and_load("bad_header.sparam", "SPARAM v2\nports 1\npoints 2\n"),
        doctest::Contains("line 1"), parse_error);

    CHECK_THROWS_WITH_AS(
        write_and_load("descending.sparam",
                       "SPARAM v1\nports 1\npoints 2\n"
                       "wl 1.6e-06\n0+0j\nwl 1.5e-06\n0+0j\n"),
        doctest::Contains("line 6"), parse_error);

    CHECK_THROWS_WITH_AS(
        write_and_load("short_row.sparam",
                       "SPARAM v1\nports 2\npoints 2\n"
                       "wl 1.5e-06\n0+0j\n"),
        doctest::Contains("line 5"), parse_error);

    CHECK_THROWS_WITH_AS(
        write_and_load("bad_entry.sparam",
                       "SPARAM v1\nports 1\npoints 2\n"
                       "wl 1.5e-06\n0.5\nwl 1.6e-06\n0+0j\n"),
        doctest::Contains("line 5"), parse_error);

    CHECK_THROWS_AS(load_table("/nonexistent/nope.sparam"), io_error);
}

TEST_CASE("directional coupler: pinned couplings") {
    auto s = gen_directional_coupler(0.5, 0.0, 0.0);
    CHECK(close(std::abs(s(2, 0)), std::sqrt(0.5)));
    CHECK(close(std::abs(s(3, 0)), std::sqrt(0.5)));
    CHECK(s(0, 0) == complex(0.0, 0.0));
    CHECK(s(1, 0) == complex(0.0, 0.0));

    auto full = gen_directional_coupler(1.0, 0.0, 0.0);
    CHECK(close(std::abs(full(3, 0)), 1.0));
    CHECK(close(full(2, 0), 0.0));

    auto tap = gen_directional_coupler(0.1, 0.0, 0.0);
    CHECK(close(std::norm(tap(2, 0)), 0.9));
    CHECK(close(std::norm(tap(3, 0)), 0.1));

    CHECK_THROWS_AS(gen_directional_coupler(-0.1, 0.0, 0.0), validation_error);
    CHECK_THROWS_AS(gen_directional_coupler(1.1, 0.0, 0.0), validation_error);
}

TEST_CASE("directional coupler: lossless settings are unitary") {
    for (double k : {0.0, 0.1, 0.5, 0.9, 1.0}) {
        auto rep = validate(gen_directional_coupler(k, 0.0, 0.0));
        CHECK(rep.unitarity_defect <= 1e-12);
        CHECK(rep.reciprocal);
    }
    // imbalance shifts the effective coupling but stays unitary
    auto rep = validate(gen_directional_coupler(0.5, 0.0, 0.05));
    CHECK(rep.unitarity_defect <= 1e-12);
    auto s = gen_directional_coupler(0.5, 0.0, 0.05);
    CHECK(close(std::norm(s(3, 0)), 0.55));
}

TEST_CASE("y-branch: split and recombination") {
    auto s = gen_y_branch(0.0);
    auto b = s.apply({complex(1.0, 0.0), {}, {}});
    CHECK(close(b[0], 0.0));
    CHECK(close(b[1], std::sqrt(0.5)));
    CHECK(close(b[2], std::sqrt(0.5)));

    b = s.apply({{}, complex(std::sqrt(0.5), 0.0), complex(std::sqrt(0.5), 0.0)});
    CHECK(close(b[0], 1.0));
    CHECK(close(b[1], 0.0));
    CHECK(close(b[2], 0.0));

    b = s.apply({{}, complex(std::sqrt(0.5), 0.0), complex(-std::sqrt(0.5), 0.0)});
    CHECK(close(b[0], 0.0));
    CHECK(close(b[1], 0.0));
    CHECK(close(b[2], 0.0));
}

TEST_CASE("waveguide: pinned transmissions") {
    auto s0 = gen_waveguide(0.0, 2.4, 4.2, 1.55e-6, 3.0, 1.55e-6);
    CHECK(close(s0(1, 0), 1.0));

    // n_eff * L = one wavelength => phase wraps to zero
    double lam = 1.55e-6, n = 2.0, L = lam / n;
    auto s1 = gen_waveguide(L, n, n, lam, 0.0, lam);
    CHECK(close(s1(1, 0), 1.0, 1e-9));

    // 100 um at 3 dB/cm is 0.03 dB of power loss, so the field picks up
    // 10^(-0.03/20) ~= 0.9965
    auto s2 = gen_waveguide(100e-6, 2.4, 2.4, 1.55e-6, 3.0, 1.55e-6);
    CHECK(std::abs(std::abs(s2(1, 0)) - std::pow(10.0, -0.03 / 20.0)) <= 1e-12);
    CHECK(s2(1, 0) == s2(0, 1));
    CHECK(s2(0, 0) == complex(0.0, 0.0));
}

TEST_CASE("transfer matrix: conversions and cascades") {
    auto through = t_to_s(tmatrix{});
    CHECK(through(0, 0) == complex(0.0, 0.0));
    CHECK(through(1, 0) == complex(1.0, 0.0));
    CHECK(through(0, 1) == complex(1.0, 0.0));
    CHECK(through(1, 1) == complex(0.0, 0.0));

    for (int k = 0; k < 100; ++k) {
        tmatrix t{random_complex() + complex(2.0, 0.0), random_complex(),
                  random_complex(), random_complex() + complex(2.0, 0.0)};
        auto back = s_to_t(t_to_s(t));
        CHECK(close(back.t11, t.t11));
        CHECK(close(back.t12, t.t12));
        CHECK(close(back.t21, t.t21));
        CHECK(close(back.t22, t.t22));
    }

    // cascading two guides through the transfer domain = one longer guide
    double lam = 1.552e-6;
    auto w1 = gen_waveguide(31e-6, 2.35, 4.1, 1.55e-6, 1.7, lam);
    auto w2 = gen_waveguide(45e-6, 2.35, 4.1, 1.55e-6, 1.7, lam);
    auto w12 = gen_waveguide(76e-6, 2.35, 4.1, 1.55e-6, 1.7, lam);
    auto cascaded = t_to_s(s_to_t(w1) * s_to_t(w2));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(close(cascaded(i, j), w12(i, j)));

    CHECK_THROWS_AS(t_to_s(tmatrix{0.0, 1.0, 1.0, 0.0}), validation_error);
    smatrix blocked(2);
    blocked(0, 0) = 1.0;
    CHECK_THROWS_AS(s_to_t(blocked), validation_error);
}

TEST_CASE("index step: Fresnel coefficients") {
    double n1 = 2.4006, n2 = 2.4606;
    auto s = t_to_s(t_interface(n1, n2));
    double rho = (n1 - n2) / (n1 + n2);
    CHECK(std::abs(std::abs(s(0, 0)) - std::abs(rho)) <= 1e-12);
    CHECK(std::abs(std::norm(s(0, 0)) + std::norm(s(1, 0)) - 1.0) <= 1e-12);

    // a zero-width second segment cancels the two interfaces exactly,
    // leaving the plain first segment
    auto degenerate = gen_bragg_reflector(1, n1, n2, 158.5e-9, 0.0, 1.55e-6);
    CHECK(std::abs(degenerate(0, 0)) <= 1e-12);
}

TEST_CASE("bragg reflector: no contrast degenerates to a plain guide") {
    auto s = gen_bragg_reflector(40, 2.43, 2.43, 158.5e-9, 158.5e-9, 1.54e-6);
    CHECK(std::abs(s(0, 0)) <= 1e-12);
    CHECK(close(std::abs(s(1, 0)), 1.0));
}

TEST_CASE("bragg reflector: lossless, reciprocal, stopband at the pitch resonance") {
    const double n1 = 2.4006, n2 = 2.4606, w = 158.5e-9;
    double peak_wl = 0.0, peak_r = -1.0;
    for (int k = 0; k <= 220; ++k) {
        double wl = 1.53e-6 + k * 0.1e-9;
        auto s = gen_bragg_reflector(120, n1, n2, w, w, wl);
        double r2 = std::norm(s(0, 0)), t2 = std::norm(s(1, 0));
        CHECK(std::abs(r2 + t2 - 1.0) <= 1e-9);
        CHECK(close(s(0, 1), s(1, 0)));
        if (r2 > peak_r) {
            peak_r = r2;
            peak_wl = wl;
        }
    }
    // length-weighted mean index 2.4306, pitch 317 nm -> twice their product
    CHECK(std::abs(peak_wl - 1.541e-6) <= 2e-9);
    CHECK(peak_r > 0.9);
}

TEST_CASE("bragg reflector: peak reflectivity grows with period count") {
    const double n1 = 2.4006, n2 = 2.4606, w = 158.5e-9;
    const double lam_b = 2.0 * 2.4306 * 317e-9;
    double prev = -1.0;
    for (int periods : {1, 5, 20, 60, 120, 200}) {
        double r2 = std::norm(gen_bragg_reflector(periods, n1, n2, w, w, lam_b)(0, 0));
        CHECK(r2 >= prev);
        prev = r2;
    }
    CHECK_THROWS_AS(gen_bragg_reflector(0, n1, n2, w, w, lam_b), validation_error);
}

TEST_CASE("validate: reports against thresholds") {
    smatrix id(2);
    id(0, 0) = id(1, 1) = 1.0;
    auto rep = validate(id);
    CHECK(rep.passive);
    CHECK(rep.lossless);
    CHECK(rep.reciprocal);
    CHECK(std::abs(rep.max_singular_value - 1.0) <= 1e-12);

    rep = validate(gen_directional_coupler(0.5, 0.0, 0.0));
    CHECK(std::abs(rep.max_singular_value - 1.0) <= 1e-12);
    CHECK(rep.lossless);
    CHECK(rep.reciprocal);

    smatrix hot(2);
    hot(1, 0) = 1.5;
    rep = validate(hot);
    CHECK(!rep.passive);
    CHECK(rep.max_singular_value > 1.4);

    // lossy but passive and reciprocal
    rep = validate(gen_waveguide(100e-6, 2.4, 4.2, 1.55e-6, 3.0, 1.55e-6));
    CHECK(rep.passive);
    CHECK(!rep.lossless);
    CHECK(rep.reciprocal);
}
