#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ipskit/circuit.hpp"
#include "ipskit/cnf.hpp"
#include "ipskit/errors.hpp"

namespace ipskit {

namespace detail {

inline std::string strip_comment(const std::string& line) {
    auto pos = line.find(';');
    std::string s = pos == std::string::npos ? line : line.substr(0, pos);
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::uint32_t parse_node_ref(const std::string& tok, std::size_t limit) {
    if (tok.size() < 2 || tok[0] != '%') throw ParseError("expected node reference, got " + tok);
    std::uint32_t k = static_cast<std::uint32_t>(std::stoul(tok.substr(1)));
    if (k == 0 || k > limit) throw ParseError("node reference out of range: " + tok);
    return k - 1;
}

inline void write_circuit_body(std::ostream& os, const Circuit& c) {
    for (std::size_t i = 0; i < c.nodes.size(); ++i) {
        const Node& n = c.nodes[i];
        os << "%" << (i + 1) << " = ";
        switch (n.kind) {
        case NodeKind::Const: os << "const " << n.cval; break;
        case NodeKind::Var: os << n.var.str(); break;
        case NodeKind::Lin:
            os << "lin";
            for (std::size_t k = 0; k < n.children.size(); ++k)
                os << " " << n.coeffs[k] << "*%" << (n.children[k] + 1);
            break;
        case NodeKind::Prod:
            os << "mul";
            for (auto ch : n.children) os << " %" << (ch + 1);
            break;
        case NodeKind::Div:
            os << "div %" << (n.children[0] + 1) << " %" << (n.children[1] + 1);
            break;
        }
        os << "\n";
    }
    for (auto o : c.outputs) os << "out %" << (o + 1) << "\n";
}

// Parses a single node or output line into the circuit. Returns false if the
// line does not look like circuit body content.
inline bool parse_circuit_line(const std::string& line, Circuit& c) {
    std::istringstream ls(line);
    std::string first;
    ls >> first;
    if (first == "out") {
        std::string ref;
        ls >> ref;
        c.outputs.push_back(parse_node_ref(ref, c.nodes.size()));
        return true;
    }
    if (first.empty() || first[0] != '%') return false;
    std::uint32_t id = static_cast<std::uint32_t>(std::stoul(first.substr(1)));
    if (id != c.nodes.size() + 1)
        throw ParseError("node ids must be sequential; expected %" +
                         std::to_string(c.nodes.size() + 1) + ", got " + first);
    std::string eq, kind;
    ls >> eq >> kind;
    if (eq != "=") throw ParseError("expected '=' in node line: " + line);
    if (kind == "const") {
        long long v;
        if (!(ls >> v)) throw ParseError("bad const: " + line);
        c.add_const(v);
    } else if (kind[0] == 'x' || kind[0] == 'f') {
        std::uint32_t idx = static_cast<std::uint32_t>(std::stoul(kind.substr(1)));
        if (idx == 0) throw ParseError("variable indices are 1-based: " + line);
        c.add_var(kind[0] == 'x' ? VarId::X(idx) : VarId::F(idx));
    } else if (kind == "lin") {
        std::vector<std::int64_t> coeffs;
        std::vector<std::uint32_t> children;
        std::string term;
        while (ls >> term) {
            auto star = term.find('*');
            if (star == std::string::npos) throw ParseError("bad lin term: " + term);
            coeffs.push_back(std::stoll(term.substr(0, star)));
            children.push_back(parse_node_ref(term.substr(star + 1), c.nodes.size()));
        }
        c.add_lin(std::move(coeffs), std::move(children));
    } else if (kind == "mul") {
        std::vector<std::uint32_t> children;
        std::string ref;
        while (ls >> ref) children.push_back(parse_node_ref(ref, c.nodes.size()));
        c.add_prod(std::move(children));
    } else if (kind == "div") {
        std::string a, b;
        ls >> a >> b;
        c.add_div(parse_node_ref(a, c.nodes.size()), parse_node_ref(b, c.nodes.size()));
    } else {
        throw ParseError("unknown node kind: " + kind);
    }
    return true;
}

inline std::uint64_t parse_modulus_token(const std::string& tok) {
    if (tok == "integer") return 0;
    return std::stoull(tok);
}

} // namespace detail

struct CircuitFile {
    Circuit circuit;
    std::uint64_t modulus = 0; // 0 = integer mode
};

inline void write_algcircuit(std::ostream& os, const Circuit& c, std::uint64_t modulus) {
    os << "algcircuit v1\n";
    if (modulus == 0) os << "modulus integer\n";
    else os << "modulus " << modulus << "\n";
    os << "xvars " << c.n_xvars() << "\n";
    os << "fvars " << c.n_fvars() << "\n";
    detail::write_circuit_body(os, c);
}

inline std::string algcircuit_to_string(const Circuit& c, std::uint64_t modulus) {
    std::ostringstream os;
    write_algcircuit(os, c, modulus);
    return os.str();
}

inline CircuitFile parse_algcircuit(std::istream& in) {
    CircuitFile cf;
    std::string raw;
    bool header = false;
    while (std::getline(in, raw)) {
        std::string line = detail::strip_comment(raw);
        if (line.empty()) continue;
        if (!header) {
            if (line != "algcircuit v1") throw MalformedHeader("expected 'algcircuit v1', got: " + line);
            header = true;
            continue;
        }
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "modulus") {
            std::string tok;
            ls >> tok;
            cf.modulus = detail::parse_modulus_token(tok);
        } else if (key == "xvars") {
            ls >> cf.circuit.declared_xvars;
        } else if (key == "fvars") {
            ls >> cf.circuit.declared_fvars;
        } else if (!detail::parse_circuit_line(line, cf.circuit)) {
            throw ParseError("unrecognized line: " + line);
        }
    }
    if (!header) throw MalformedHeader("missing algcircuit header");
    if (cf.circuit.outputs.empty()) throw ParseError("circuit has no output");
    return cf;
}

inline CircuitFile parse_algcircuit(const std::string& text) {
    std::istringstream in(text);
    return parse_algcircuit(in);
}

// ---------------------------------------------------------------- system files

inline void write_system(std::ostream& os, const PolySystem& sys) {
    os << "system v1\n";
    if (sys.modulus == 0) os << "modulus integer\n";
    else os << "modulus " << sys.modulus << "\n";
    os << "xvars " << sys.n_vars << "\n";
    os << "equations " << sys.equations.size() << "\n";
    os << "boolean_axioms " << (sys.boolean_axioms_included ? 1 : 0) << "\n";
    for (std::size_t i = 0; i < sys.equations.size(); ++i) {
        const auto& prov = sys.provenance[i];
        os << "eq ";
        switch (prov.kind) {
        case EquationProvenance::Kind::Clause: os << "clause " << prov.index; break;
        case EquationProvenance::Kind::BooleanAxiom: os << "boolean " << prov.index; break;
        case EquationProvenance::Kind::User: os << "user " << prov.index; break;
        }
        os << "\n";
        detail::write_circuit_body(os, sys.equations[i]);
    }
}

inline std::string system_to_string(const PolySystem& sys) {
    std::ostringstream os;
    write_system(os, sys);
    return os.str();
}

inline PolySystem parse_system(std::istream& in) {
    PolySystem sys;
    std::string raw;
    bool header = false;
    std::size_t declared_eqs = 0;
    bool in_equation = false;
    while (std::getline(in, raw)) {
        std::string line = detail::strip_comment(raw);
        if (line.empty()) continue;
        if (!header) {
            if (line != "system v1") throw MalformedHeader("expected 'system v1', got: " + line);
            header = true;
            continue;
        }
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "modulus") {
            std::string tok;
            ls >> tok;
            sys.modulus = detail::parse_modulus_token(tok);
        } else if (key == "xvars") {
            ls >> sys.n_vars;
        } else if (key == "equations") {
            ls >> declared_eqs;
        } else if (key == "boolean_axioms") {
            int flag;
            ls >> flag;
            sys.boolean_axioms_included = flag != 0;
        } else if (key == "eq") {
            std::string kind;
            std::uint32_t idx = 0;
            ls >> kind >> idx;
            EquationProvenance prov;
            if (kind == "clause") prov.kind = EquationProvenance::Kind::Clause;
            else if (kind == "boolean") prov.kind = EquationProvenance::Kind::BooleanAxiom;
            else if (kind == "user") prov.kind = EquationProvenance::Kind::User;
            else throw ParseError("unknown equation provenance: " + kind);
            prov.index = idx;
            sys.equations.emplace_back();
            sys.provenance.push_back(prov);
            in_equation = true;
        } else {
            if (!in_equation || !detail::parse_circuit_line(line, sys.equations.back()))
                throw ParseError("unrecognized line: " + line);
        }
    }
    if (!header) throw MalformedHeader("missing system header");
    if (sys.equations.size() != declared_eqs)
        throw ParseError("equation count mismatch: declared " + std::to_string(declared_eqs) +
                         ", found " + std::to_string(sys.equations.size()));
    for (const auto& eq : sys.equations) {
        if (eq.outputs.size() != 1) throw ParseError("each equation needs exactly one output");
        if (!eq.division_free()) throw ParseError("system equations must be division-free");
        if (eq.max_fvar() != 0) throw ParseError("system equations must not use f-variables");
    }
    return sys;
}

inline PolySystem parse_system(const std::string& text) {
    std::istringstream in(text);
    return parse_system(in);
}

} // namespace ipskit
