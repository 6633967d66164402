#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "ipskit/circuit_io.hpp"

using namespace ipskit;
using namespace th;

namespace {

std::string slurp(const std::string& name) {
    std::ifstream in(std::string(IPSKIT_GOLDEN_DIR) + "/" + name, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Circuit random_division_free(RandomSource& rng, int nx, int nf, int gates) {
    Circuit c;
    std::vector<std::uint32_t> pool;
    for (int i = 1; i <= nx; ++i) pool.push_back(c.add_var(VarId::X(i)));
    for (int i = 1; i <= nf; ++i) pool.push_back(c.add_var(VarId::F(i)));
    pool.push_back(c.add_const(static_cast<std::int64_t>(rng.next_below(7)) - 3));
    for (int g = 0; g < gates; ++g) {
        std::uint32_t a = pool[rng.next_below(pool.size())];
        std::uint32_t b = pool[rng.next_below(pool.size())];
        if (rng.next_below(2))
            pool.push_back(c.add_prod({a, b}));
        else
            pool.push_back(c.add_lin({static_cast<std::int64_t>(rng.next_below(9)) - 4,
                                      static_cast<std::int64_t>(rng.next_below(9)) - 4},
                                     {a, b}));
    }
    c.outputs = {pool.back()};
    return c;
}

} // namespace

TEST_CASE("algcircuit golden file is bit-exact") {
    Circuit c;
    auto f1 = c.add_var(VarId::F(1));
    auto f2 = c.add_var(VarId::F(2));
    c.outputs = {c.add_lin({1, 1}, {f1, f2})};
    c.declared_xvars = 1;
    CHECK(algcircuit_to_string(c, 0) == slurp("cert1.algcircuit"));

    CircuitFile cf = parse_algcircuit(slurp("cert1.algcircuit"));
    CHECK(cf.modulus == 0);
    CHECK(cf.circuit.n_xvars() == 1);
    CHECK(cf.circuit.n_fvars() == 2);
    CHECK(algcircuit_to_string(cf.circuit, cf.modulus) == slurp("cert1.algcircuit"));
}

TEST_CASE("system golden file is bit-exact") {
    CnfFormula cnf = parse_dimacs("p cnf 1 2\n1 0\n-1 0\n");
    PolySystem sys = translate(cnf, true);
    CHECK(system_to_string(sys) == slurp("sys1.system"));

    PolySystem back = parse_system(slurp("sys1.system"));
    CHECK(back.modulus == 0);
    CHECK(back.n_vars == 1);
    CHECK(back.boolean_axioms_included);
    REQUIRE(back.size() == 3);
    CHECK(back.provenance[2].kind == EquationProvenance::Kind::BooleanAxiom);
    CHECK(system_to_string(back) == slurp("sys1.system"));
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(poly_equal(expand_circuit(back.equations[i]), expand_circuit(sys.equations[i])));
}

TEST_CASE("algcircuit supports every node kind and comments") {
    std::string text =
        "; certificate with division\n"
        "algcircuit v1\n"
        "modulus 10007   ; prime field\n"
        "xvars 2\n"
        "fvars 0\n"
        "%1 = x1\n"
        "%2 = x2\n"
        "%3 = const -5\n"
        "%4 = mul %1 %2 %3\n"
        "%5 = div %4 %2\n"
        "%6 = lin 2*%5 -1*%3\n"
        "out %6\n";
    CircuitFile cf = parse_algcircuit(text);
    CHECK(cf.modulus == 10007);
    REQUIRE(cf.circuit.nodes.size() == 6);
    CHECK(cf.circuit.nodes[3].kind == NodeKind::Prod);
    CHECK(cf.circuit.nodes[4].kind == NodeKind::Div);
    CHECK_FALSE(cf.circuit.division_free());
    // (x1*x2*(-5))/x2 * 2 + 5 at x1=3, x2=7 is -30+5 = -25
    Prime p(10007);
    std::map<VarId, FieldElement> pt{{VarId::X(1), FieldElement(3, p)},
                                     {VarId::X(2), FieldElement(7, p)}};
    CHECK(evaluate(cf.circuit, pt, p)[0] == FieldElement::from_int(-25, p.value()));
    // round-trip preserves structure
    CircuitFile again = parse_algcircuit(algcircuit_to_string(cf.circuit, cf.modulus));
    CHECK(algcircuit_to_string(again.circuit, again.modulus) ==
          algcircuit_to_string(cf.circuit, cf.modulus));
}

TEST_CASE("algcircuit random round trips") {
    RandomSource rng(555);
    Prime p(10007);
    for (int t = 0; t < 200; ++t) {
        Circuit c = random_division_free(rng, 3, 2, 6);
        CircuitFile back = parse_algcircuit(algcircuit_to_string(c, p.value()));
        CHECK(back.modulus == p.value());
        std::map<VarId, FieldElement> pt;
        for (int i = 1; i <= 3; ++i) pt[VarId::X(i)] = fp_sample(rng, p);
        for (int i = 1; i <= 2; ++i) pt[VarId::F(i)] = fp_sample(rng, p);
        CHECK(evaluate(back.circuit, pt, p)[0] == evaluate(c, pt, p)[0]);
    }
}

TEST_CASE("algcircuit parse errors") {
    CHECK_THROWS_AS(parse_algcircuit("algcircuit v2\nxvars 1\n"), MalformedHeader);
    CHECK_THROWS_AS(parse_algcircuit("xvars 1\n%1 = x1\nout %1\n"), MalformedHeader);
    CHECK_THROWS_AS(parse_algcircuit(""), MalformedHeader);
    CHECK_THROWS_AS(parse_algcircuit("algcircuit v1\n%2 = x1\nout %2\n"), ParseError);
    CHECK_THROWS_AS(parse_algcircuit("algcircuit v1\n%1 = lin 1*%2\nout %1\n"), ParseError);
    CHECK_THROWS_AS(parse_algcircuit("algcircuit v1\n%1 = mul %1 %1\nout %1\n"), ParseError);
    CHECK_THROWS_AS(parse_algcircuit("algcircuit v1\n%1 = sin %1\nout %1\n"), ParseError);
    CHECK_THROWS_AS(parse_algcircuit("algcircuit v1\n%1 = x1\n"), ParseError); // no output
    CHECK_THROWS_AS(parse_algcircuit("algcircuit v1\n%1 = x0\nout %1\n"), ParseError);
}

TEST_CASE("system parse errors") {
    CHECK_THROWS_AS(parse_system("algcircuit v1\n"), MalformedHeader);
    CHECK_THROWS_AS(parse_system("system v1\nequations 2\neq user 1\n%1 = x1\nout %1\n"),
                    ParseError); // count mismatch
    CHECK_THROWS_AS(parse_system("system v1\nequations 1\neq user 1\n%1 = f1\nout %1\n"),
                    ParseError); // f-variables not allowed in equations
    CHECK_THROWS_AS(
        parse_system("system v1\nequations 1\neq user 1\n%1 = x1\n%2 = div %1 %1\nout %2\n"),
        ParseError); // division not allowed
    CHECK_THROWS_AS(parse_system("system v1\nequations 1\neq user 1\n%1 = x1\n"),
                    ParseError); // missing output
    CHECK_THROWS_AS(parse_system("system v1\nequations 1\neq mystery 1\n%1 = x1\nout %1\n"),
                    ParseError);
}

TEST_CASE("system round trip over a prime field") {
    CnfFormula cnf = parse_dimacs("p cnf 3 2\n1 -2 3 0\n-1 2 0\n");
    PolySystem sys = translate(cnf, true, 10007);
    PolySystem back = parse_system(system_to_string(sys));
    CHECK(back.modulus == 10007);
    CHECK(back.n_vars == 3);
    REQUIRE(back.size() == sys.size());
    for (std::size_t i = 0; i < sys.size(); ++i)
        CHECK(poly_equal(expand_circuit(back.equations[i], Caps{}, 10007),
                         expand_circuit(sys.equations[i], Caps{}, 10007)));
}
