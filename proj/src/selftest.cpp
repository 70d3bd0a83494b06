#include "qrng/selftest.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>

#include "qrng/bitstring.hpp"
#include "qrng/fir.hpp"
#include "qrng/health.hpp"
#include "qrng/meta_ledger.hpp"
#include "qrng/rng.hpp"
#include "qrng/sp800_22.hpp"
#include "qrng/stats.hpp"

namespace qrng {

namespace {

#include "reference_values.inc"

std::string num(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::vector<SelftestCase> run_selftest()
{
    std::vector<SelftestCase> out;
    auto check = [&](std::string name, const std::function<std::string()>& body) {
        SelftestCase c{std::move(name), false, ""};
        try {
            c.detail = body();
            c.passed = c.detail.empty();
        } catch (const std::exception& e) {
            c.detail = std::string("exception: ") + e.what();
        }
        out.push_back(std::move(c));
    };

    struct Kat {
        Philox4x32::Block ctr;
        std::uint64_t key;
        Philox4x32::Block expect;
    };
    const Kat kats[] = {
        {{0, 0, 0, 0}, 0, {0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}},
        {{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, 0xffffffffffffffffULL,
         {0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}},
        {{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, 0x299f31d0a4093822ULL,
         {0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}},
    };
    for (std::size_t i = 0; i < std::size(kats); ++i) {
        check("philox4x32-10 vector " + std::to_string(i), [&] {
            return Philox4x32::apply(kats[i].ctr, kats[i].key) == kats[i].expect ? "" : "mismatch";
        });
    }

    struct IntervalCase {
        std::uint64_t n;
        double alpha;
        CountInterval expect;
    };
    const IntervalCase intervals[] = {
        {72390, 0.002, {109, 181}}, {535612, 1e-4, {32, 76}}, {1016, 0.002, {0, 6}}, {72390, 2e-5, {0, 5}}};
    for (const auto& c : intervals) {
        check("acceptance_interval(" + std::to_string(c.n) + ", " + num(c.alpha) + ")", [&] {
            const auto got = acceptance_interval(c.n, c.alpha);
            return got == c.expect ? std::string()
                                   : "got [" + std::to_string(got.lo) + "," + std::to_string(got.hi) + "]";
        });
    }

    for (const auto& [l, expect] : {std::pair{1000, 0.981}, std::pair{600, 0.978}}) {
        check("ratio threshold L=" + std::to_string(l), [&] {
            const double t = sp800_22::ratio_threshold(static_cast<std::size_t>(l), 0.01);
            return std::abs(std::round(t * 1000.0) / 1000.0 - expect) < 1e-12 ? "" : "got " + num(t);
        });
    }

    for (const auto& r : kErfcRefs) {
        check("erfc(" + num(r.x) + ")", [&] {
            const double got = erfc(r.x);
            return std::abs(got - r.value) <= 1e-10 ? "" : "got " + num(got);
        });
    }
    for (const auto& r : kIgamcRefs) {
        check("igamc(" + num(r.a) + ", " + num(r.x) + ")", [&] {
            const double got = igamc(r.a, r.x);
            return std::abs(got - r.value) <= 1e-10 ? "" : "got " + num(got);
        });
    }

    check("frequency example", [] {
        const auto p = sp800_22::frequency(BitString::from_text("1011010101")).p_values.at(0);
        return std::abs(p - 0.527089) < 1e-4 ? "" : "got " + num(p);
    });
    check("runs example", [] {
        const auto p = sp800_22::runs(BitString::from_text("1001101011")).p_values.at(0);
        return std::abs(p - 0.147232) < 1e-4 ? "" : "got " + num(p);
    });

    check("binomial coefficients", [] {
        if (binomial_coeffs(1) != std::vector<std::uint8_t>{1, 1}) return "m=1";
        if (binomial_coeffs(7) != std::vector<std::uint8_t>{1, 7, 21, 35, 35, 21, 7, 1}) return "m=7";
        if (binomial_coeffs(8) != std::vector<std::uint8_t>{1, 8, 28, 56, 70, 56, 28, 8, 1}) return "m=8";
        return "";
    });
    check("fir two-tap sum", [] {
        FirState f(1);
        if (f.next(3)) return "emitted during warm-up";
        const auto y = f.next(5);
        return y && *y == 8 ? "" : "wrong output";
    });
    check("fir impulse response", [] {
        // Impulse right after the M warm-up inputs.
        std::vector<std::uint16_t> xs(16, 0);
        xs[7] = 1;
        const auto ys = FirState(7).process(xs);
        const std::vector<std::uint8_t> expect{1, 7, 21, 35, 35, 21, 7, 1, 0};
        return ys == expect ? "" : "wrong response";
    });
    check("fir constant input, M=8", [] {
        const std::vector<std::uint16_t> xs(64, 517);
        for (auto y : FirState(8).process(xs)) {
            if (y != 0) return "nonzero output";
        }
        return "";
    });

    check("ideal arcsine entropies", [] {
        const auto pmf = ideal_arcsine_pmf();
        const double h = shannon_entropy(pmf);
        const double hmin = min_entropy(pmf);
        if (std::abs(h - kArcsineShannonBits) > 1e-9) return "shannon " + num(h);
        if (std::abs(hmin - kArcsineMinEntropyBits) > 1e-9) return "min-entropy " + num(hmin);
        const double closed = -std::log2(2.0 / std::numbers::pi * std::asin(1.0 / 32.0));
        if (std::abs(hmin - closed) > 1e-9) return "closed form " + num(closed);
        return std::string();
    });

    check("ledger round trip", [] {
        const PValueRecord r{"2020-01-01T06:00:00Z", "sp800-22", 3, "Serial/delta1", 1, 0.1 + 1e-17 * 3};
        const auto back = parse_ledger_csv(ledger_csv_header() + "\n" + ledger_csv_row(r) + "\n");
        return back.size() == 1 && back[0] == r ? "" : "records differ";
    });

    return out;
}

}  // namespace qrng
