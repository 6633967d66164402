#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "helpers.hpp"
#include "ipskit/vnp.hpp"

using namespace ipskit;
using namespace th;

namespace {

// t_e(x) = prod_i b(e_i, x_i)
SparsePoly cube_term(std::uint32_t e, std::uint32_t n, std::uint64_t mod = 0) {
    SparsePoly t = K(1, mod);
    for (std::uint32_t v = 1; v <= n; ++v)
        t = t * (((e >> (v - 1)) & 1u) ? X(v, mod) : K(1, mod) - X(v, mod));
    return t;
}

const char* kUnsat3 =
    "p cnf 3 8\n"
    "1 2 3 0\n-1 2 3 0\n1 -2 3 0\n1 2 -3 0\n"
    "-1 -2 3 0\n-1 2 -3 0\n1 -2 -3 0\n-1 -2 -3 0\n";

const char* kUnsatChain =
    "p cnf 3 4\n1 2 0\n1 -2 0\n-1 3 0\n-1 -3 0\n";

} // namespace

TEST_CASE("greedy partition examples") {
    SECTION("pinch") {
        GreedyPartition gp = greedy_partition(parse_dimacs("p cnf 1 2\n1 0\n-1 0\n"));
        REQUIRE(gp.parts.size() == 2);
        CHECK(gp.parts[0] == std::vector<std::uint32_t>{0});
        CHECK(gp.parts[1] == std::vector<std::uint32_t>{1});
        CHECK(gp.uncovered.empty());
    }
    SECTION("satisfiable leaves the cube partly uncovered") {
        GreedyPartition gp = greedy_partition(parse_dimacs("p cnf 1 1\n1 0\n"));
        CHECK(gp.parts[0] == std::vector<std::uint32_t>{0});
        CHECK(gp.uncovered == std::vector<std::uint32_t>{1});
    }
    SECTION("empty clause swallows everything") {
        CnfFormula cnf;
        cnf.n_vars = 2;
        cnf.clauses = {{}, {1}};
        GreedyPartition gp = greedy_partition(cnf);
        CHECK(gp.parts[0].size() == 4);
        CHECK(gp.parts[1].empty());
        CHECK(gp.uncovered.empty());
    }
    SECTION("partition covers the cube disjointly") {
        CnfFormula cnf = parse_dimacs(kUnsatChain);
        GreedyPartition gp = greedy_partition(cnf);
        std::vector<std::uint32_t> all;
        for (std::size_t i = 0; i < gp.parts.size(); ++i) {
            for (std::uint32_t e : gp.parts[i]) {
                CHECK_FALSE(clause_satisfied(cnf.clauses[i], e));
                for (std::size_t j = 0; j < i; ++j)
                    CHECK(clause_satisfied(cnf.clauses[j], e));
                all.push_back(e);
            }
        }
        for (std::uint32_t e : gp.uncovered) all.push_back(e);
        std::sort(all.begin(), all.end());
        REQUIRE(all.size() == 8);
        for (std::uint32_t e = 0; e < 8; ++e) CHECK(all[e] == e);
    }
    SECTION("cap") {
        CnfFormula big;
        big.n_vars = 25;
        CHECK_THROWS_AS(greedy_partition(big), CubeTooLarge);
    }
}

TEST_CASE("partition of unity") {
    for (std::uint32_t n = 1; n <= 8; ++n) {
        SparsePoly sum;
        for (std::uint32_t e = 0; e < (1u << n); ++e) sum = sum + cube_term(e, n);
        CHECK(poly_equal(sum, K(1)));
    }
    // larger n: check at random points instead of expanding
    Prime p(10007);
    RandomSource rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        std::uint32_t n = 12;
        std::map<VarId, FieldElement> pt;
        for (std::uint32_t v = 1; v <= n; ++v) pt[VarId::X(v)] = fp_sample(rng, p);
        FieldElement acc = FieldElement(0, p);
        for (std::uint32_t e = 0; e < (1u << n); ++e) {
            FieldElement t = FieldElement(1, p);
            for (std::uint32_t v = 1; v <= n; ++v) {
                FieldElement x = pt[VarId::X(v)];
                t = t * (((e >> (v - 1)) & 1u) ? x : FieldElement(1, p) - x);
            }
            acc = acc + t;
        }
        CHECK(acc == FieldElement(1, p));
    }
}

TEST_CASE("clause polynomial divides a cube term iff the assignment falsifies it") {
    RandomSource rng(77);
    std::uint64_t mod = 10007;
    for (int trial = 0; trial < 12; ++trial) {
        std::uint32_t n = 3 + static_cast<std::uint32_t>(rng.next_below(4)); // n in 3..6
        std::vector<std::int32_t> clause;
        std::uint32_t width = 1 + static_cast<std::uint32_t>(rng.next_below(3));
        for (std::uint32_t k = 0; k < width; ++k) {
            std::int32_t v = static_cast<std::int32_t>(1 + k);
            clause.push_back(rng.next_below(2) ? v : -v);
        }
        SparsePoly cp = expand_circuit(clause_circuit(clause), Caps{}, mod);
        for (std::uint32_t e = 0; e < (1u << n); ++e) {
            auto res = poly_divide(cube_term(e, n, mod), {cp}, MonoOrder::Lex);
            bool divides = res.remainder.is_zero();
            CHECK(divides == !clause_satisfied(clause, e));
        }
    }
}

TEST_CASE("explicit certificate for the pinch formula is f1 + f2") {
    Certificate cert = build_certificate_explicit(parse_dimacs("p cnf 1 2\n1 0\n-1 0\n"));
    CHECK(poly_equal(expand_circuit(cert.circuit), F(1) + F(2)));
    CHECK(verify_exact(cert).accepted);
}

TEST_CASE("explicit certificates for unsatisfiable formulas") {
    for (const char* text : {kUnsat3, kUnsatChain}) {
        CnfFormula cnf = parse_dimacs(text);
        REQUIRE_FALSE(cnf_satisfiable(cnf));
        Certificate cert = build_certificate_explicit(cnf);
        CHECK(verify_exact(cert).accepted);
        CHECK(is_hilbert_like(cert));
        CircuitMetrics m = metrics(cert.circuit);
        CHECK(m.constant_free);
        CHECK(m.depth <= 4);
    }
}

TEST_CASE("explicit certificate fails for satisfiable input") {
    Certificate cert = build_certificate_explicit(parse_dimacs("p cnf 1 1\n1 0\n"));
    Verdict v = verify_exact(cert);
    CHECK_FALSE(v.accepted);
    CHECK(v.failure_condition == 2);
}

TEST_CASE("boolean-axiom padding keeps the certificate valid") {
    CnfFormula cnf = parse_dimacs(kUnsatChain);
    Certificate cert = build_certificate_explicit(cnf, true);
    CHECK(cert.system.boolean_axioms_included);
    CHECK(cert.system.size() == 4 + 3);
    CHECK(cert.circuit.n_fvars() == 4 + 3);
    CHECK(verify_exact(cert).accepted);
    CHECK(is_hilbert_like(cert));
}

TEST_CASE("clause order changes the partition but not validity") {
    // clauses 1 and 2 overlap on the assignment x1=x2=0, so order matters
    CnfFormula cnf = parse_dimacs("p cnf 2 3\n1 2 0\n1 0\n-1 0\n");
    std::vector<std::uint32_t> order{2, 1, 0};
    GreedyPartition forward = greedy_partition(cnf);
    GreedyPartition backward = greedy_partition(cnf, order);
    CHECK(forward.parts != backward.parts);
    Certificate cert = build_certificate_explicit(cnf, false, 0, order);
    CHECK(verify_exact(cert).accepted);
    CHECK_THROWS_AS(greedy_partition(cnf, {0, 1}), InputError);
}

TEST_CASE("explicit certificates work over a prime field too") {
    CnfFormula cnf = parse_dimacs(kUnsat3);
    Certificate cert = build_certificate_explicit(cnf, false, 10007);
    CHECK(cert.system.modulus == 10007);
    CHECK(verify_exact(cert).accepted);
    RandomSource rng(5);
    CHECK(verify_randomized(cert, rng).accepted);
}

TEST_CASE("summand sums to the explicit certificate over the cube") {
    for (const char* text : {"p cnf 1 2\n1 0\n-1 0\n", kUnsatChain, "p cnf 2 1\n1 -2 0\n"}) {
        CnfFormula cnf = parse_dimacs(text);
        Circuit s = build_certificate_summand(cnf);
        Certificate cert = build_certificate_explicit(cnf);
        SparsePoly total;
        for (std::uint32_t e = 0; e < (1u << cnf.n_vars); ++e) {
            std::map<VarId, Circuit> bind;
            for (std::uint32_t v = 1; v <= cnf.n_vars; ++v) {
                Circuit k;
                k.outputs = {k.add_const((e >> (v - 1)) & 1u)};
                bind[VarId::X(cnf.n_vars + v)] = k;
            }
            total = total + expand_circuit(substitute(s, bind));
        }
        CHECK(poly_equal(total, expand_circuit(cert.circuit)));
    }
}

TEST_CASE("summand is constant free") {
    CnfFormula cnf = parse_dimacs(kUnsatChain);
    Circuit s = build_certificate_summand(cnf);
    CHECK(metrics(s).constant_free);
}
