#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "ipskit/ips.hpp"

using namespace ipskit;
using namespace th;

namespace {

// system {1 - x1, x1} from the CNF (x1) AND (NOT x1)
PolySystem pinch_system(std::uint64_t mod = 0) {
    CnfFormula cnf = parse_dimacs("p cnf 1 2\n1 0\n-1 0\n");
    return translate(cnf, false, mod);
}

} // namespace

TEST_CASE("exact verification accepts and rejects") {
    PolySystem sys = pinch_system();
    Certificate good = make_refutation(F(1) + F(2), sys);
    Verdict v = verify_exact(good);
    CHECK(v.accepted);
    CHECK(v.soundness_bound == 0.0);

    Certificate bad = make_refutation(F(1), sys);
    Verdict vb = verify_exact(bad);
    CHECK_FALSE(vb.accepted);
    CHECK(vb.failure_condition == 2);

    Certificate bad1 = make_refutation(F(1) + X(1), sys);
    Verdict vb1 = verify_exact(bad1);
    CHECK_FALSE(vb1.accepted);
    CHECK(vb1.failure_condition == 1);
}

TEST_CASE("derivation certificates") {
    // F1 = x, F2 = 1-x; C = f1 f2 + f1 derives 2x - x^2
    PolySystem sys = make_system({X(1), K(1) - X(1)}, 1);
    SparsePoly target = K(2) * X(1) - X(1) * X(1);
    Certificate c = make_derivation(F(1) * F(2) + F(1), sys, target);
    CHECK(verify_exact(c).accepted);
    Certificate wrong = make_derivation(F(1) * F(2) + F(1), sys, X(1));
    CHECK_FALSE(verify_exact(wrong).accepted);
}

TEST_CASE("hilbert-like predicate") {
    PolySystem sys = pinch_system();
    CHECK(is_hilbert_like(make_refutation(F(1) + F(2), sys)));
    CHECK_FALSE(is_hilbert_like(make_refutation(F(1) * F(2) + F(1), sys)));
    CHECK_FALSE(is_hilbert_like(make_refutation(F(1) + X(1), sys))); // constant term in f
}

TEST_CASE("zero certificates") {
    PolySystem sys = pinch_system();
    // syzygy-built zero certificate: x*f1 + (x-1)*f2
    SparsePoly z = X(1) * F(1) + (X(1) - K(1)) * F(2);
    CHECK(is_zero_certificate(poly_to_circuit(z), sys));
    // difference of two valid refutation certificates
    SparsePoly c1 = F(1) + F(2);
    SparsePoly c2 = c1 + z;
    CHECK(verify_exact(make_refutation(c2, sys)).accepted);
    CHECK(is_zero_certificate(poly_to_circuit(c2 - c1), sys));

    Circuit zero;
    zero.outputs = {zero.add_const(0)};
    CHECK(is_zero_certificate(zero, sys));

    PolySystem just_x = make_system({X(1)}, 1);
    CHECK_FALSE(is_zero_certificate(poly_to_circuit(F(1)), just_x));
}

TEST_CASE("certificate algebra: products of refutations") {
    PolySystem sys = pinch_system();
    SparsePoly c1 = F(1) + F(2);
    SparsePoly c2 = c1 + X(1) * F(1) + (X(1) - K(1)) * F(2);
    CHECK(verify_exact(make_refutation(c1 * c2, sys)).accepted);
}

TEST_CASE("randomized verification") {
    PolySystem sys = pinch_system();
    Certificate good = make_refutation(F(1) + F(2), sys);
    RandomSource rng(123);
    Verdict v = verify_randomized(good, rng);
    CHECK(v.accepted);
    CHECK(v.mode == Verdict::Mode::Randomized);
    CHECK(v.trials == 20);
    CHECK(v.soundness_bound > 0.0);
    CHECK(v.soundness_bound < 1e-10);

    Certificate bad = make_refutation(F(1), sys);
    Verdict vb = verify_randomized(bad, rng);
    CHECK_FALSE(vb.accepted);
    CHECK(vb.failure_condition == 2);

    RandomizedOptions small_p;
    small_p.prime = 97; // degree bound is 1, so any p <= 100 is too small
    CHECK_THROWS_AS(verify_randomized(good, rng, small_p), PrimeTooSmall);
}

TEST_CASE("randomized never rejects what exact accepts") {
    PolySystem sys = pinch_system();
    RandomSource rng(77);
    for (int k = 0; k < 20; ++k) {
        SparsePoly z = X(1) * F(1) + (X(1) - K(1)) * F(2);
        SparsePoly c = F(1) + F(2) + z.scaled(k);
        Certificate cert = make_refutation(c, sys);
        REQUIRE(verify_exact(cert).accepted);
        CHECK(verify_randomized(cert, rng).accepted);
    }
}

TEST_CASE("soundness spot check: satisfiable system admits no certificate") {
    CnfFormula cnf = parse_dimacs("p cnf 2 1\n1 2 0\n");
    REQUIRE(cnf_satisfiable(cnf));
    PolySystem sys = translate(cnf, true, 10007); // {clause, x1^2-x1, x2^2-x2}
    RandomSource rng(99);
    int accepted = 0;
    for (int t = 0; t < 10000; ++t) {
        // random small circuit over x1,x2,f1..f3
        Circuit c;
        std::vector<std::uint32_t> pool;
        pool.push_back(c.add_var(VarId::X(1)));
        pool.push_back(c.add_var(VarId::X(2)));
        for (int i = 1; i <= 3; ++i) pool.push_back(c.add_var(VarId::F(i)));
        pool.push_back(c.add_const(1));
        for (int g = 0; g < 4; ++g) {
            std::uint32_t a = pool[rng.next_below(pool.size())];
            std::uint32_t b = pool[rng.next_below(pool.size())];
            if (rng.next_below(2)) pool.push_back(c.add_prod({a, b}));
            else pool.push_back(c.add_lin({1, static_cast<std::int64_t>(rng.next_below(5)) - 2}, {a, b}));
        }
        c.outputs = {pool.back()};
        Certificate cand;
        cand.circuit = c;
        cand.system = sys;
        cand.kind = CertKind::Refutation;
        if (verify_exact(cand).accepted) ++accepted;
    }
    CHECK(accepted == 0);
}

TEST_CASE("hilbertize") {
    SECTION("f1 f2 + f1 over {x, 1-x}") {
        PolySystem sys = make_system({X(1), K(1) - X(1)}, 1);
        SparsePoly target = K(2) * X(1) - X(1) * X(1);
        Certificate c = make_derivation(F(1) * F(2) + F(1), sys, target);
        Certificate h = hilbertize(c);
        CHECK(is_hilbert_like(h));
        CHECK(verify_exact(h).accepted);
        // rule output: f1*(1-x) + f1
        SparsePoly want = F(1) * (K(1) - X(1)) + F(1);
        CHECK(poly_equal(expand_circuit(h.circuit), want));
    }
    SECTION("f1^2 over {x^2 - x}") {
        SparsePoly f1sq = F(1) * F(1);
        SparsePoly ax = X(1) * X(1) - X(1);
        PolySystem sys = make_system({ax}, 1);
        Certificate c = make_derivation(f1sq, sys, ax * ax);
        Certificate h = hilbertize(c);
        CHECK(is_hilbert_like(h));
        CHECK(verify_exact(h).accepted);
        CHECK(poly_equal(expand_circuit(h.circuit), F(1) * ax));
    }
    SECTION("already hilbert-like is semantically unchanged") {
        PolySystem sys = pinch_system();
        Certificate c = make_refutation(F(1) + F(2), sys);
        Certificate h = hilbertize(c);
        CHECK(poly_equal(expand_circuit(h.circuit), expand_circuit(c.circuit)));
    }
    SECTION("random certificates keep their target") {
        RandomSource rng(2024);
        std::uint64_t mod = 10007;
        int done = 0;
        while (done < 60) {
            // random system of 3 equations in 3 variables
            std::vector<SparsePoly> eqs;
            for (int i = 0; i < 3; ++i) {
                SparsePoly e(mod);
                for (int t = 0; t < 3; ++t) {
                    Monomial m;
                    for (int v = 1; v <= 3; ++v) {
                        auto ex = rng.next_below(3);
                        if (ex) m.exps.push_back({VarId::X(v), static_cast<std::uint32_t>(ex)});
                    }
                    e.add_term(m, static_cast<std::int64_t>(rng.next_below(mod)));
                }
                if (e.is_zero()) e = X(1, mod);
                eqs.push_back(e);
            }
            PolySystem sys = make_system(eqs, 3, mod);
            // random certificate with every monomial containing a placeholder
            SparsePoly cp(mod);
            int nmono = 2 + static_cast<int>(rng.next_below(9));
            for (int t = 0; t < nmono; ++t) {
                Monomial m;
                std::uint32_t fdeg = 0;
                for (int v = 1; v <= 3 && fdeg < 3; ++v) {
                    auto ex = rng.next_below(2);
                    if (ex) {
                        m.exps.push_back({VarId::F(v), static_cast<std::uint32_t>(ex)});
                        fdeg += ex;
                    }
                }
                if (fdeg == 0) m.exps.push_back({VarId::F(1), 1});
                for (int v = 1; v <= 2; ++v) {
                    auto ex = rng.next_below(2);
                    if (ex) m.exps.push_back({VarId::X(v), static_cast<std::uint32_t>(ex)});
                }
                std::sort(m.exps.begin(), m.exps.end(),
                          [](auto& a, auto& b) { return a.first < b.first; });
                cp.add_term(m, static_cast<std::int64_t>(rng.next_below(mod)));
            }
            if (cp.is_zero()) continue;
            // target := C(x, F(x)) makes it a valid derivation by construction
            Certificate c;
            c.circuit = poly_to_circuit(cp);
            c.system = sys;
            c.kind = CertKind::Derivation;
            Circuit bound = substitute(c.circuit, detail::system_bindings(sys));
            c.target = poly_to_circuit(expand_circuit(bound, Caps{}, mod));
            REQUIRE(verify_exact(c).accepted);
            Certificate h = hilbertize(c);
            CHECK(is_hilbert_like(h));
            CHECK(verify_exact(h).accepted);
            ++done;
        }
    }
}

TEST_CASE("rips_to_ips") {
    SECTION("denominator 1 is a no-op") {
        PolySystem base = make_system({X(1) * X(1), X(1) * X(2)}, 2);
        PolySystem aug = make_system({X(1) * X(1), X(1) * X(2), K(1)}, 2);
        Certificate e;
        e.circuit = poly_to_circuit(F(3)); // E = d
        e.system = aug;
        e.kind = CertKind::Refutation;
        Circuit den;
        den.outputs = {den.add_const(1)};
        Circuit num = poly_to_circuit(F(1));
        Circuit target = poly_to_circuit(X(1) * X(1));
        Certificate out = rips_to_ips(num, den, e, target);
        CHECK(verify_exact(out).accepted);
        CHECK(poly_equal(expand_circuit(out.circuit), F(1)));
    }
    SECTION("no inverse certificate exists for x1 - x2 on {x1^2, x1 x2}") {
        PolySystem aug = make_system({X(1) * X(1), X(1) * X(2), X(1) - X(2)}, 2);
        Certificate e;
        e.circuit = poly_to_circuit(F(3)); // claimed E = d; fails verification
        e.system = aug;
        e.kind = CertKind::Refutation;
        Circuit den = poly_to_circuit(X(1) - X(2));
        Circuit num = poly_to_circuit(F(1) - F(2));
        Circuit target = poly_to_circuit(X(1));
        CHECK_THROWS_AS(rips_to_ips(num, den, e, target), InverseCertInvalid);
    }
    SECTION("2x2 inversion principle") {
        InversionSetup s = inversion_setup(0);
        REQUIRE(verify_exact(s.inverse_cert).accepted);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                Circuit target = poly_to_circuit(s.target[a][b]);
                Certificate out = rips_to_ips(s.num[a][b], s.den, s.inverse_cert, target);
                CHECK(out.circuit.division_free());
                CHECK(verify_exact(out).accepted);
            }
    }
}

TEST_CASE("mismatched denominator is rejected") {
    PolySystem aug = make_system({X(1) * X(1), X(1) * X(2), K(1)}, 2);
    Certificate e;
    e.circuit = poly_to_circuit(F(3));
    e.system = aug;
    e.kind = CertKind::Refutation;
    Circuit den = poly_to_circuit(X(1)); // but augmented system says 1
    Circuit num = poly_to_circuit(F(1));
    Circuit target = poly_to_circuit(X(1) * X(1));
    CHECK_THROWS_AS(rips_to_ips(num, den, e, target), InverseCertInvalid);
}
