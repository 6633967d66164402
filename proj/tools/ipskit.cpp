// Command-line surface for the ipskit library.
//
// Exit codes: 0 accepted/success, 1 checked-and-rejected, 2 bad input,
// 3 resource cap exceeded.  Every command ends its report with a summary
// line `RESULT accepted=<bool> mode=<m> trials=<t> soundness=<q>` and is
// byte-deterministic for a fixed argv and seed.

#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ipskit/circuit_io.hpp"
#include "ipskit/cnf.hpp"
#include "ipskit/errors.hpp"
#include "ipskit/frege.hpp"
#include "ipskit/grobner.hpp"
#include "ipskit/ips.hpp"
#include "ipskit/pc.hpp"
#include "ipskit/propenc.hpp"
#include "ipskit/vnp.hpp"

namespace {

using namespace ipskit;

constexpr int kAccepted = 0;
constexpr int kRejected = 1;
constexpr int kBadInput = 2;
constexpr int kCapHit = 3;

std::string read_input(const std::string& path) {
    std::ostringstream buf;
    if (path == "-") {
        buf << std::cin.rdbuf();
    } else {
        std::ifstream in(path);
        if (!in) throw InputError("cannot open " + path);
        buf << in.rdbuf();
    }
    return buf.str();
}

void write_output(const std::string& out_path, const std::string& text) {
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw InputError("cannot open " + out_path + " for writing");
    out << text;
}

Caps parse_caps(const std::string& spec) {
    Caps caps;
    if (spec.empty()) return caps;
    std::istringstream in(spec);
    std::string item;
    while (std::getline(in, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw InputError("bad --caps entry: " + item);
        const std::string key = item.substr(0, eq);
        const std::string val = item.substr(eq + 1);
        try {
            if (key == "terms")
                caps.max_terms = std::stoull(val);
            else if (key == "degree")
                caps.max_degree = std::stoull(val);
            else
                throw InputError("unknown --caps key: " + key);
        } catch (const std::logic_error&) {
            throw InputError("bad --caps value: " + item);
        }
    }
    return caps;
}

std::string result_line(bool accepted, const std::string& mode, std::uint32_t trials,
                        double soundness) {
    std::ostringstream os;
    os << "RESULT accepted=" << (accepted ? "true" : "false") << " mode=" << mode
       << " trials=" << trials << " soundness=" << soundness << "\n";
    return os.str();
}

// Shared flags collected once and reused by the subcommands.
struct Options {
    std::uint64_t modulus = 0;
    std::uint32_t trials = 20;
    std::uint64_t seed = 0;
    std::string mode = "exact";
    std::string caps_spec;
    std::string out;
    std::uint32_t jobs = 1;
};

void add_common_flags(CLI::App* cmd, Options& opt, bool with_verify_flags) {
    cmd->add_option("-o,--output", opt.out, "output file (default stdout)");
    cmd->add_option("--caps", opt.caps_spec, "resource caps, e.g. terms=100000,degree=32");
    if (with_verify_flags) {
        cmd->add_option("--mode", opt.mode, "exact|randomized")
            ->check(CLI::IsMember({"exact", "randomized"}));
        cmd->add_option("--trials", opt.trials, "randomized verifier trials");
        cmd->add_option("--seed", opt.seed, "random seed");
        cmd->add_option("--modulus", opt.modulus, "field modulus (0 = integers)");
    }
}

Certificate load_certificate(const std::string& sys_path, const std::string& cert_path,
                             const std::string& target_path) {
    PolySystem sys = parse_system(read_input(sys_path));
    CircuitFile cf = parse_algcircuit(read_input(cert_path));
    if (cf.modulus != 0 && sys.modulus != 0 && cf.modulus != sys.modulus)
        throw ModulusMismatch("certificate and system disagree on the modulus");
    Certificate cert;
    cert.circuit = cf.circuit;
    cert.system = sys;
    if (!target_path.empty()) {
        cert.kind = CertKind::Derivation;
        cert.target = parse_algcircuit(read_input(target_path)).circuit;
    }
    return cert;
}

std::vector<SparsePoly> system_polys(const PolySystem& sys, const Caps& caps) {
    std::vector<SparsePoly> out;
    for (const Circuit& eq : sys.equations) out.push_back(expand_circuit(eq, caps, sys.modulus));
    return out;
}

MonoOrder parse_order(const std::string& name) {
    if (name == "lex") return MonoOrder::Lex;
    if (name == "grevlex") return MonoOrder::GrevLex;
    throw InputError("unknown order: " + name);
}

int run_verify(const Options& opt, const std::string& sys_path,
               const std::vector<std::string>& cert_paths, const std::string& target_path) {
    const Caps caps = parse_caps(opt.caps_spec);
    bool all_ok = true;
    std::ostringstream report;
    Verdict last;
    for (const std::string& cert_path : cert_paths) {
        Certificate cert = load_certificate(sys_path, cert_path, target_path);
        Verdict v;
        if (opt.mode == "exact") {
            v = verify_exact(cert, caps);
        } else {
            RandomSource rng(opt.seed);
            RandomizedOptions ro;
            ro.trials = opt.trials;
            if (opt.modulus != 0) ro.prime = opt.modulus;
            v = verify_randomized(cert, rng, ro);
        }
        if (!v.accepted) report << cert_path << ": failure_condition=" << v.failure_condition << "\n";
        all_ok = all_ok && v.accepted;
        last = v;
    }
    report << result_line(all_ok, opt.mode, opt.mode == "exact" ? 0 : last.trials,
                          opt.mode == "exact" ? 0.0 : last.soundness_bound);
    std::cout << report.str();
    return all_ok ? kAccepted : kRejected;
}

std::string formula_output(const BoolFormula& f, bool as_cnf) {
    if (!as_cnf) return formula_to_string(f) + "\n";
    return write_dimacs(tseitin_cnf(f).cnf);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ipskit: algebraic proof-system toolkit"};
    app.require_subcommand(1);
    std::function<int()> action;

    // ---- translate
    Options t_opt;
    std::string t_cnf;
    bool t_bool_axioms = false;
    {
        CLI::App* cmd = app.add_subcommand("translate", "CNF to polynomial system");
        cmd->add_option("cnf", t_cnf, "DIMACS input ('-' = stdin)")->required();
        cmd->add_flag("--boolean-axioms", t_bool_axioms, "append the x^2 - x axioms");
        cmd->add_option("--modulus", t_opt.modulus, "field modulus (0 = integers)");
        add_common_flags(cmd, t_opt, false);
        cmd->callback([&]() {
            action = [&]() {
                CnfFormula cnf = parse_dimacs(read_input(t_cnf));
                PolySystem sys = translate(cnf, t_bool_axioms, t_opt.modulus);
                write_output(t_opt.out, system_to_string(sys));
                std::cout << result_line(true, "none", 0, 0.0);
                return kAccepted;
            };
        });
    }

    // ---- construct-vnp
    Options v_opt;
    std::string v_cnf, v_sys_out;
    bool v_pad = false;
    {
        CLI::App* cmd = app.add_subcommand("construct-vnp", "explicit certificate for a CNF");
        cmd->add_option("cnf", v_cnf, "DIMACS input ('-' = stdin)")->required();
        cmd->add_flag("--pad-boolean-axioms", v_pad, "include zero rows for the boolean axioms");
        cmd->add_option("--modulus", v_opt.modulus, "field modulus (0 = integers)");
        cmd->add_option("--system-out", v_sys_out, "also write the translated system here");
        add_common_flags(cmd, v_opt, false);
        cmd->callback([&]() {
            action = [&]() {
                CnfFormula cnf = parse_dimacs(read_input(v_cnf));
                Certificate cert = build_certificate_explicit(cnf, v_pad, v_opt.modulus);
                if (!v_sys_out.empty()) write_output(v_sys_out, system_to_string(cert.system));
                write_output(v_opt.out, algcircuit_to_string(cert.circuit, v_opt.modulus));
                std::cout << result_line(true, "none", 0, 0.0);
                return kAccepted;
            };
        });
    }

    // ---- verify
    Options ver_opt;
    std::string ver_sys, ver_target;
    std::vector<std::string> ver_certs;
    {
        CLI::App* cmd = app.add_subcommand("verify", "check a certificate against a system");
        cmd->add_option("system", ver_sys, "system file")->required();
        cmd->add_option("certs", ver_certs, "certificate circuit files ('-' = stdin)")->required();
        cmd->add_option("--target", ver_target, "derivation target circuit");
        cmd->add_option("--jobs", ver_opt.jobs, "independent inputs processed per batch");
        add_common_flags(cmd, ver_opt, true);
        cmd->callback([&]() {
            action = [&]() { return run_verify(ver_opt, ver_sys, ver_certs, ver_target); };
        });
    }

    // ---- pit
    Options pit_opt;
    std::string pit_sys, pit_circ;
    {
        CLI::App* cmd = app.add_subcommand("pit", "zero-certificate test for a circuit");
        cmd->add_option("system", pit_sys, "system file")->required();
        cmd->add_option("circuit", pit_circ, "circuit file ('-' = stdin)")->required();
        add_common_flags(cmd, pit_opt, true);
        cmd->callback([&]() {
            action = [&]() {
                PolySystem sys = parse_system(read_input(pit_sys));
                Circuit c = parse_algcircuit(read_input(pit_circ)).circuit;
                bool ok;
                if (pit_opt.mode == "exact") {
                    ok = is_zero_certificate(c, sys, parse_caps(pit_opt.caps_spec));
                    std::cout << result_line(ok, "exact", 0, 0.0);
                } else {
                    RandomSource rng(pit_opt.seed);
                    RandomizedOptions ro;
                    ro.trials = pit_opt.trials;
                    if (pit_opt.modulus != 0) ro.prime = pit_opt.modulus;
                    ok = is_zero_certificate_randomized(c, sys, rng, ro);
                    std::cout << result_line(ok, "randomized", ro.trials, 0.0);
                }
                return ok ? kAccepted : kRejected;
            };
        });
    }

    // ---- pc {check, compile, decompile}
    Options pc_opt;
    std::string pc_sys, pc_proof, pc_cert, pc_target;
    {
        CLI::App* pc = app.add_subcommand("pc", "polynomial-calculus pipelines");
        pc->require_subcommand(1);
        CLI::App* chk = pc->add_subcommand("check", "check a pcproof");
        chk->add_option("system", pc_sys)->required();
        chk->add_option("proof", pc_proof)->required();
        add_common_flags(chk, pc_opt, false);
        chk->callback([&]() {
            action = [&]() {
                PolySystem sys = parse_system(read_input(pc_sys));
                PcProof proof = parse_pcproof(read_input(pc_proof));
                PcMeasures m = check_pc(proof, sys, parse_caps(pc_opt.caps_spec));
                std::cout << "lines=" << m.lines << " degree=" << m.degree
                          << " monomials=" << m.monomials << "\n"
                          << result_line(true, "exact", 0, 0.0);
                return kAccepted;
            };
        });
        CLI::App* cmp = pc->add_subcommand("compile", "compile a pcproof to a certificate");
        cmp->add_option("system", pc_sys)->required();
        cmp->add_option("proof", pc_proof)->required();
        add_common_flags(cmp, pc_opt, false);
        cmp->callback([&]() {
            action = [&]() {
                PolySystem sys = parse_system(read_input(pc_sys));
                PcProof proof = parse_pcproof(read_input(pc_proof));
                Certificate cert = compile_pc_to_ips(proof, sys, parse_caps(pc_opt.caps_spec));
                write_output(pc_opt.out, algcircuit_to_string(cert.circuit, sys.modulus));
                std::cout << result_line(true, "none", 0, 0.0);
                return kAccepted;
            };
        });
        CLI::App* dec = pc->add_subcommand("decompile", "rewrite a certificate as a pcproof");
        dec->add_option("system", pc_sys)->required();
        dec->add_option("cert", pc_cert)->required();
        dec->add_option("--target", pc_target, "derivation target circuit");
        add_common_flags(dec, pc_opt, false);
        dec->callback([&]() {
            action = [&]() {
                Certificate cert = load_certificate(pc_sys, pc_cert, pc_target);
                PcProof proof = compile_ips_to_pc(cert, parse_caps(pc_opt.caps_spec));
                write_output(pc_opt.out, pcproof_to_string(proof));
                std::cout << result_line(true, "none", 0, 0.0);
                return kAccepted;
            };
        });
    }

    // ---- frege {check, compile}
    Options fr_opt;
    std::string fr_cnf, fr_proof;
    {
        CLI::App* fr = app.add_subcommand("frege", "sequent-refutation pipelines");
        fr->require_subcommand(1);
        CLI::App* chk = fr->add_subcommand("check", "check a fregeproof");
        chk->add_option("cnf", fr_cnf)->required();
        chk->add_option("proof", fr_proof)->required();
        add_common_flags(chk, fr_opt, false);
        chk->callback([&]() {
            action = [&]() {
                CnfFormula cnf = parse_dimacs(read_input(fr_cnf));
                FregeRefutation ref = parse_fregeproof(read_input(fr_proof), cnf);
                FregeCheck res = check_frege(ref);
                std::cout << "depth=" << res.depth << " cedents=" << res.cedents << "\n"
                          << result_line(true, "exact", 0, 0.0);
                return kAccepted;
            };
        });
        CLI::App* cmp = fr->add_subcommand("compile", "compile a fregeproof to a certificate");
        cmp->add_option("cnf", fr_cnf)->required();
        cmp->add_option("proof", fr_proof)->required();
        add_common_flags(cmp, fr_opt, false);
        cmp->callback([&]() {
            action = [&]() {
                CnfFormula cnf = parse_dimacs(read_input(fr_cnf));
                FregeRefutation ref = parse_fregeproof(read_input(fr_proof), cnf);
                Certificate cert = compile_frege_to_ips(ref);
                write_output(fr_opt.out, algcircuit_to_string(cert.circuit, 2));
                std::cout << result_line(true, "none", 0, 0.0);
                return kAccepted;
            };
        });
    }

    // ---- hilbertize
    Options h_opt;
    std::string h_sys, h_cert, h_target;
    {
        CLI::App* cmd = app.add_subcommand("hilbertize", "make a certificate placeholder-linear");
        cmd->add_option("system", h_sys)->required();
        cmd->add_option("cert", h_cert)->required();
        cmd->add_option("--target", h_target, "derivation target circuit");
        add_common_flags(cmd, h_opt, false);
        cmd->callback([&]() {
            action = [&]() {
                Certificate cert = load_certificate(h_sys, h_cert, h_target);
                Certificate out = hilbertize(cert, parse_caps(h_opt.caps_spec));
                write_output(h_opt.out, algcircuit_to_string(out.circuit, out.system.modulus));
                std::cout << result_line(true, "none", 0, 0.0);
                return kAccepted;
            };
        });
    }

    // ---- rips-to-ips
    Options r_opt;
    std::string r_num, r_den, r_aug, r_inv, r_target;
    {
        CLI::App* cmd = app.add_subcommand("rips-to-ips", "eliminate division from a certificate");
        cmd->add_option("numerator", r_num)->required();
        cmd->add_option("denominator", r_den)->required();
        cmd->add_option("augmented-system", r_aug)->required();
        cmd->add_option("inverse-cert", r_inv)->required();
        cmd->add_option("target", r_target)->required();
        add_common_flags(cmd, r_opt, false);
        cmd->callback([&]() {
            action = [&]() {
                Circuit num = parse_algcircuit(read_input(r_num)).circuit;
                Circuit den = parse_algcircuit(read_input(r_den)).circuit;
                Certificate inv;
                inv.system = parse_system(read_input(r_aug));
                inv.circuit = parse_algcircuit(read_input(r_inv)).circuit;
                Circuit target = parse_algcircuit(read_input(r_target)).circuit;
                Certificate out = rips_to_ips(num, den, inv, target, parse_caps(r_opt.caps_spec));
                write_output(r_opt.out, algcircuit_to_string(out.circuit, out.system.modulus));
                std::cout << result_line(true, "none", 0, 0.0);
                return kAccepted;
            };
        });
    }

    // ---- grobner {basis, member, radical, syzygies, geomcert}
    Options g_opt;
    std::string g_sys, g_poly, g_order = "grevlex";
    auto run_grobner = [&](const std::string& sub) {
                const Caps caps = parse_caps(g_opt.caps_spec);
                PolySystem sys = parse_system(read_input(g_sys));
                const MonoOrder ord = parse_order(g_order);
                std::ostringstream body;
                bool ok = true;
                if (sub == "basis") {
                    GroebnerBasis basis = buchberger(system_polys(sys, caps), ord, false, caps);
                    for (const SparsePoly& p : basis.generators) body << p.str() << "\n";
                } else if (sub == "member" || sub == "radical") {
                    CircuitFile qf = parse_algcircuit(read_input(g_poly));
                    SparsePoly q = expand_circuit(qf.circuit, caps, sys.modulus);
                    std::vector<SparsePoly> polys = system_polys(sys, caps);
                    if (sub == "member") {
                        GroebnerBasis basis = buchberger(polys, ord, true, caps);
                        MembershipResult res = ideal_membership(q, basis, caps);
                        ok = res.member;
                        if (ok)
                            for (std::size_t i = 0; i < res.cofactors.size(); ++i)
                                body << "h" << (i + 1) << " = " << res.cofactors[i].str() << "\n";
                    } else {
                        ok = radical_membership(q, polys, caps);
                    }
                } else if (sub == "syzygies") {
                    SyzygyGenerators syz = syzygy_generators(system_polys(sys, caps), ord, caps);
                    for (const ModuleElem& z : syz.generators) {
                        body << "(";
                        for (std::size_t i = 0; i < z.size(); ++i)
                            body << (i ? " ; " : " ") << z[i].str();
                        body << " )\n";
                    }
                } else { // geomcert
                    std::optional<Certificate> cert = geometric_refutation(sys, caps);
                    ok = cert.has_value();
                    if (ok) {
                        body << algcircuit_to_string(cert->circuit, sys.modulus);
                    }
                }
                write_output(g_opt.out, body.str());
                std::cout << result_line(ok, "exact", 0, 0.0);
                return ok ? kAccepted : kRejected;
    };
    {
        CLI::App* gb = app.add_subcommand("grobner", "ideal computations");
        gb->require_subcommand(1);
        auto common = [&](CLI::App* cmd, bool needs_poly) {
            cmd->add_option("system", g_sys)->required();
            if (needs_poly) cmd->add_option("poly", g_poly, "circuit for the query polynomial")->required();
            cmd->add_option("--order", g_order, "lex|grevlex")
                ->check(CLI::IsMember({"lex", "grevlex"}));
            add_common_flags(cmd, g_opt, false);
            const std::string sub = cmd->get_name();
            cmd->callback([&run_grobner, &action, sub]() {
                action = [&run_grobner, sub]() { return run_grobner(sub); };
            });
        };
        common(gb->add_subcommand("basis", "reduced generating set"), false);
        common(gb->add_subcommand("member", "ideal membership with cofactors"), true);
        common(gb->add_subcommand("radical", "radical membership"), true);
        common(gb->add_subcommand("syzygies", "generators of the syzygy module"), false);
        common(gb->add_subcommand("geomcert", "input-only zero certificate"), false);
    }

    // ---- encode {truthbool, proofips, axiom}
    Options e_opt;
    std::uint32_t e_n = 1, e_m = 1, e_records = 1, e_grecords = 1, e_inputs = 1, e_which = 1,
                  e_position = 1;
    std::uint64_t e_prime = 3;
    std::vector<std::uint32_t> e_perm;
    bool e_cnf = false;
    {
        CLI::App* enc = app.add_subcommand("encode", "propositional encodings");
        enc->require_subcommand(1);
        CLI::App* tb = enc->add_subcommand("truthbool", "the universal 3CNF evaluator formula");
        tb->add_option("--vars", e_n, "CNF variables")->required();
        tb->add_option("--clauses", e_m, "CNF clauses")->required();
        tb->add_flag("--cnf", e_cnf, "emit tseitin DIMACS instead of an s-expression");
        add_common_flags(tb, e_opt, false);
        tb->callback([&]() {
            action = [&]() {
                write_output(e_opt.out, formula_output(build_truth_bool(e_n, e_m), e_cnf));
                std::cout << result_line(true, "none", 0, 0.0);
                return kAccepted;
            };
        });
        CLI::App* pi = enc->add_subcommand("proofips", "certificate-checking formula");
        pi->add_option("--vars", e_n, "CNF variables")->required();
        pi->add_option("--clauses", e_m, "CNF clauses")->required();
        pi->add_option("--cert-records", e_records, "records in the certificate layout")->required();
        pi->add_option("--modulus", e_prime, "grid modulus of the reference identity test");
        pi->add_flag("--cnf", e_cnf, "emit tseitin DIMACS instead of an s-expression");
        add_common_flags(pi, e_opt, false);
        pi->callback([&]() {
            action = [&]() {
                ProofIpsLayout pl;
                pl.n = e_n;
                pl.m = e_m;
                pl.cert = CircuitLayout{e_n + e_m, e_records};
                BoolFormula f = build_proof_ips(bruteforce_k_factory(e_prime), pl);
                write_output(e_opt.out, formula_output(f, e_cnf));
                std::cout << result_line(true, "none", 0, 0.0);
                return kAccepted;
            };
        });
        CLI::App* ax = enc->add_subcommand("axiom", "one of the four identity-test axioms");
        ax->add_option("--which", e_which, "axiom number 1..4")->required();
        ax->add_option("--inputs", e_inputs, "circuit layout inputs")->required();
        ax->add_option("--records", e_records, "circuit layout records")->required();
        ax->add_option("--g-records", e_grecords, "records of G (axiom 3)");
        ax->add_option("--position", e_position, "substituted input (axiom 3)");
        ax->add_option("--perm", e_perm, "permutation image list (axiom 4)");
        ax->add_option("--modulus", e_prime, "grid modulus of the reference identity test");
        ax->add_flag("--cnf", e_cnf, "emit tseitin DIMACS instead of an s-expression");
        add_common_flags(ax, e_opt, false);
        ax->callback([&]() {
            action = [&]() {
                CircuitLayout lay{e_inputs, e_records};
                CircuitLayout layg{e_inputs, e_grecords};
                PitAxiomOptions opts;
                opts.position = e_position;
                opts.g_layout = &layg;
                opts.permutation = e_perm;
                if (e_which == 4 && opts.permutation.empty())
                    for (std::uint32_t i = 1; i <= e_inputs; ++i) opts.permutation.push_back(i);
                BoolFormula f = build_pit_axiom(static_cast<int>(e_which),
                                                bruteforce_k_factory(e_prime), lay, opts);
                write_output(e_opt.out, formula_output(f, e_cnf));
                std::cout << result_line(true, "none", 0, 0.0);
                return kAccepted;
            };
        });
    }

    CLI11_PARSE(app, argc, argv);
    try {
        return action();
    } catch (const CapError& e) {
        std::cout << "error: " << e.what() << "\n" << result_line(false, "none", 0, 0.0);
        return kCapHit;
    } catch (const InvalidRule& e) {
        std::cout << "rejected: " << e.what() << "\n" << result_line(false, "exact", 0, 0.0);
        return kRejected;
    } catch (const FinalNotOne& e) {
        std::cout << "rejected: " << e.what() << "\n" << result_line(false, "exact", 0, 0.0);
        return kRejected;
    } catch (const RuleMismatch& e) {
        std::cout << "rejected: " << e.what() << "\n" << result_line(false, "exact", 0, 0.0);
        return kRejected;
    } catch (const NotTreeLike& e) {
        std::cout << "rejected: " << e.what() << "\n" << result_line(false, "exact", 0, 0.0);
        return kRejected;
    } catch (const NotHilbertLike& e) {
        std::cout << "rejected: " << e.what() << "\n" << result_line(false, "exact", 0, 0.0);
        return kRejected;
    } catch (const NotWeaklySkew& e) {
        std::cout << "rejected: " << e.what() << "\n" << result_line(false, "exact", 0, 0.0);
        return kRejected;
    } catch (const InverseCertInvalid& e) {
        std::cout << "rejected: " << e.what() << "\n" << result_line(false, "exact", 0, 0.0);
        return kRejected;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadInput;
    }
}
