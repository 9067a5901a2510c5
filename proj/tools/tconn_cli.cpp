// tconn: normalize, classify and compare (T)-structures over the
// two-dimensional germs I2(m) and N2, with replayable gauge certificates.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tconn/tconn.hpp"

namespace {

using namespace tconn;

struct RunConfig {
    std::vector<std::string> inputs;
    std::string output;
    std::string transform_path;
    std::string cert_path;
    std::string field;  // "", "exact", "float"
    double tol = 0;     // 0 = unset
    std::string orders;
    std::string tau1_seed;  // "p" or "p/q", real rational
    bool emit_cert = false;
    bool unchecked = false;
    std::string subcommand;
};

// exit codes: 0 ok, 1 computational refusal, 2 input error, 3 non-flat input
constexpr int kOk = 0, kRefused = 1, kBadInput = 2, kNotFlat = 3;

void write_output(const RunConfig& cfg, const Json& j) {
    std::string bytes = canonical_dump(j);
    if (cfg.output.empty()) {
        std::cout << bytes;
    } else {
        std::ofstream os(cfg.output, std::ios::binary);
        if (!os) throw SchemaError("cannot open output file: " + cfg.output);
        os << bytes;
    }
}

int fail(const RunConfig& cfg, int code, const std::string& reason,
         const std::string& message, Json extra = Json::object()) {
    Json j = std::move(extra);
    j["error"] = reason;
    j["message"] = message;
    write_output(cfg, j);
    return code;
}

Json read_json_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw SchemaError("cannot open input file: " + path);
    Json j;
    try {
        is >> j;
    } catch (const std::exception& e) {
        throw SchemaError(std::string("invalid JSON in ") + path + ": " + e.what());
    }
    return j;
}

std::string field_of_file(const Json& j) {
    if (j.is_object() && j.contains("field") && j["field"].is_string())
        return j["field"].get<std::string>();
    return "exact";
}

std::optional<Orders> parse_orders_flag(const std::string& s) {
    if (s.empty()) return std::nullopt;
    int z, t1, t2;
    char c1, c2;
    std::istringstream is(s);
    if (!(is >> z >> c1 >> t1 >> c2 >> t2) || c1 != ',' || c2 != ',' || z < 0 ||
        t1 < 0 || t2 < 0)
        throw SchemaError("--orders expects z,t1,t2 (e.g. 6,4,10)");
    return Orders{t1, t2, z};
}

// first offending term of a residual matrix, for not-flat reports
template <class F>
Json residual_report(const Mat2Series<F>& res) {
    Json j;
    j["max_residual"] = res.max_modulus_reliable();
    for (int i = 1; i <= 2; ++i)
        for (int jj = 1; jj <= 2; ++jj)
            for (auto [k1, k2, kz] : res.at(i, jj).nonzero_indices()) {
                Json t;
                t["i"] = i;
                t["j"] = jj;
                t["t1"] = k1;
                t["t2"] = k2;
                t["z"] = kz;
                t["c"] = to_json(res.at(i, jj).at(k1, k2, kz));
                j["residual_term"] = t;
                return j;
            }
    return j;
}

template <class F>
struct ParsedStructure {
    TStructure<F> s;
    Json raw;
};

// NotFlat enriched with the residual's largest term for the exit-3 report
struct NotFlatReport : NotFlat {
    Json report;
    explicit NotFlatReport(Json r)
        : NotFlat("flatness residual is nonzero"), report(std::move(r)) {}
};

// parse + validate; throws SchemaError / NotFlatReport / BadInput
template <class F>
ParsedStructure<F> load_structure(const RunConfig& cfg, const std::string& path,
                                  bool tolerate_nonflat = false) {
    Json j = read_json_file(path);
    if (!cfg.orders.empty()) {
        Orders want = *parse_orders_flag(cfg.orders);
        if (j.is_object() && j.contains("orders") &&
            !(orders_from_json(j["orders"]) == want))
            throw SchemaError("file orders differ from --orders");
    }
    TStructure<F> s = structure_from_json<F>(j, true);
    bool unchecked = cfg.unchecked ||
                     (j.is_object() && j.contains("unchecked") &&
                      j["unchecked"].is_boolean() && j["unchecked"].get<bool>());
    if (!unchecked) {
        if (!a1_is_identity_at_z0(s))
            throw BadInput("A1 at z=0 must be the identity matrix");
        auto res = flatness_residual(s);
        if (!res.is_zero_reliable() && !tolerate_nonflat)
            throw NotFlatReport(residual_report(res));
    }
    return {std::move(s), std::move(j)};
}

template <class F>
bool is_framed(const TStructure<F>& s) {
    return equals_reliable(s.A1.z_slice(0), Mat2Series<F>::identity(s.orders)) &&
           equals_reliable(s.A2.z_slice(0), basis_c2<F>(s.germ, s.orders));
}

template <class F>
int run_check(const RunConfig& cfg) {
    auto [s, raw] = load_structure<F>(cfg, cfg.inputs.at(0), true);
    Json j;
    j["germ"] = to_json(s.germ);
    j["orders"] = to_json(s.orders);
    j["field"] = F::is_exact ? "exact" : "float";
    auto res = flatness_residual(s);
    bool flat = res.is_zero_reliable();
    j["flat"] = flat;
    j["a1_identity_at_z0"] = a1_is_identity_at_z0(s);
    j["framed"] = is_framed(s);
    if (!flat) {
        Json rr = residual_report(res);
        j["error"] = "not_flat";
        for (auto it = rr.begin(); it != rr.end(); ++it) j[it.key()] = it.value();
    }
    write_output(cfg, j);
    return flat || cfg.unchecked ? kOk : kNotFlat;
}

template <class F>
int run_normalize(const RunConfig& cfg) {
    auto [s, raw] = load_structure<F>(cfg, cfg.inputs.at(0));
    auto pre = preliminary_normal_form(s);
    write_output(cfg, to_json(pre, cfg.emit_cert));
    return kOk;
}

template <class F>
F parse_tau1_seed(const std::string& s) {
    if (s.empty()) return F::one();
    long long num = 0, den = 1;
    char slash = 0;
    std::istringstream is(s);
    if (!(is >> num)) throw SchemaError("--tau1-seed expects p or p/q");
    if (is >> slash) {
        if (slash != '/' || !(is >> den)) throw SchemaError("--tau1-seed expects p or p/q");
    }
    return F::from_ratio(num, den);
}

template <class F>
int run_normal_form(const RunConfig& cfg) {
    auto [s, raw] = load_structure<F>(cfg, cfg.inputs.at(0));
    if (!s.germ.is_i2())
        throw BadInput("normal-form handles I2(m) structures; use classify for N2");
    auto pre = preliminary_normal_form(s);
    auto nf = unique_normal_form_i2(pre.f, s.germ.m, parse_tau1_seed<F>(cfg.tau1_seed));
    Json j = to_json(nf);
    if (cfg.emit_cert) j["cert"] = to_json(pre.cert);
    write_output(cfg, j);
    return kOk;
}

template <class F>
int run_classify(const RunConfig& cfg) {
    auto [s, raw] = load_structure<F>(cfg, cfg.inputs.at(0));
    if (s.germ.is_i2())
        throw BadInput("classify handles N2 structures; use normal-form for I2");
    auto cls = classify_n2(s, parse_tau1_seed<F>(cfg.tau1_seed));
    write_output(cfg, to_json(cls, cfg.emit_cert));
    return kOk;
}

template <class F>
int run_iso(const RunConfig& cfg) {
    if (cfg.inputs.size() != 2) throw SchemaError("iso needs exactly two --input files");
    auto [a, rawa] = load_structure<F>(cfg, cfg.inputs[0]);
    auto [b, rawb] = load_structure<F>(cfg, cfg.inputs[1]);
    if (!(a.germ == b.germ)) throw SchemaError("iso inputs must share one germ");
    if (!(a.orders == b.orders)) throw SchemaError("iso inputs must share orders");
    Json j;
    j["germ"] = to_json(a.germ);
    if (a.germ.is_i2()) {
        // decision up to formal gauge isomorphisms: equal unique normal forms
        auto nfa = unique_normal_form_i2(preliminary_normal_form(a).f, a.germ.m);
        auto nfb = unique_normal_form_i2(preliminary_normal_form(b).f, b.germ.m);
        int window = std::min(nfa.reliable_z, nfb.reliable_z);
        bool equal = true;
        for (int n = 0; n < window && equal; ++n)
            equal = nfa.ftilde.z_slice(n) == nfb.ftilde.z_slice(n);
        j["relation"] = "formal_gauge";
        j["isomorphic"] = equal;
        j["compared_z_slices"] = window;
    } else {
        auto ca = classify_n2(a);
        auto cb = classify_n2(b);
        j["relation"] = "formal";
        j["label_a"] = to_string(ca.label);
        j["label_b"] = to_string(cb.label);
        if (ca.label != cb.label) {
            j["isomorphic"] = false;
        } else if (ca.label != N2Label::R) {
            j["isomorphic"] = true;
        } else if (ca.r != cb.r) {
            j["isomorphic"] = false;
        } else {
            auto dec = iso_decide_520(ca, cb);
            j["isomorphic"] = dec.has_value();
            if (dec) {
                Json l;
                l["r"] = dec->r;
                l["s"] = dec->s;
                if (dec->exact_value) l["value"] = to_json(*dec->exact_value);
                j["lambda0"] = l;
            }
        }
    }
    write_output(cfg, j);
    return kOk;
}

template <class F>
int run_gauge(const RunConfig& cfg) {
    auto [s, raw] = load_structure<F>(cfg, cfg.inputs.at(0));
    Json t = read_json_file(cfg.transform_path);
    if (!t.is_object() || !t.contains("T"))
        throw SchemaError("gauge transform file needs a \"T\" matrix");
    auto T = matrix_from_json<F>(t["T"], s.orders);
    auto out = gauge_apply(T, s);
    write_output(cfg, to_json_structure(out));
    return kOk;
}

template <class F>
int run_pullback(const RunConfig& cfg) {
    auto [s, raw] = load_structure<F>(cfg, cfg.inputs.at(0));
    Json t = read_json_file(cfg.transform_path);
    if (!t.is_object() || !t.contains("lambda"))
        throw SchemaError("pullback transform file needs a \"lambda\" series");
    auto lam = series_from_json<F>(t["lambda"], s.orders);
    TStructure<F> out = base_pullback(lam, s);
    if (t.contains("T")) {
        auto T = matrix_from_json<F>(t["T"], s.orders);
        out = gauge_apply(T, out);
    }
    write_output(cfg, to_json_structure(out));
    return kOk;
}

template <class F>
int run_verify(const RunConfig& cfg) {
    if (cfg.inputs.size() != 2)
        throw SchemaError("verify needs --input source and --input target");
    auto [src, rawa] = load_structure<F>(cfg, cfg.inputs[0]);
    auto [dst, rawb] = load_structure<F>(cfg, cfg.inputs[1]);
    auto cert = certificate_from_json<F>(read_json_file(cfg.cert_path), src.orders);
    auto rep = verify_certificate(cert, src, dst);
    write_output(cfg, to_json(rep));
    return rep.pass ? kOk : kRefused;
}

template <class F>
int dispatch(const RunConfig& cfg) {
    if (cfg.subcommand == "check") return run_check<F>(cfg);
    if (cfg.subcommand == "normalize") return run_normalize<F>(cfg);
    if (cfg.subcommand == "normal-form") return run_normal_form<F>(cfg);
    if (cfg.subcommand == "classify") return run_classify<F>(cfg);
    if (cfg.subcommand == "iso") return run_iso<F>(cfg);
    if (cfg.subcommand == "gauge") return run_gauge<F>(cfg);
    if (cfg.subcommand == "pullback") return run_pullback<F>(cfg);
    if (cfg.subcommand == "verify") return run_verify<F>(cfg);
    throw SchemaError("unknown subcommand");
}

int run(RunConfig cfg) {
    // tolerance: --tol beats TCONN_TOL beats the built-in default
    double tol = 1e-10;
    if (const char* env = std::getenv("TCONN_TOL")) {
        try {
            tol = std::stod(env);
        } catch (...) {
            return fail(cfg, kBadInput, "schema_error", "TCONN_TOL is not a number");
        }
    }
    if (cfg.tol > 0) tol = cfg.tol;
    if (tol <= 0)
        return fail(cfg, kBadInput, "schema_error", "tolerance must be positive");
    ApproxComplex::default_tol() = tol;

    try {
        if (cfg.inputs.empty()) throw SchemaError("at least one --input is required");
        std::string field = cfg.field;
        if (field.empty()) field = field_of_file(read_json_file(cfg.inputs[0]));
        if (field != "exact" && field != "float")
            throw SchemaError("field must be \"exact\" or \"float\"");
        return field == "exact" ? dispatch<GaussianRational>(cfg)
                                : dispatch<ApproxComplex>(cfg);
    } catch (const NotFlatReport& e) {
        return fail(cfg, kNotFlat, e.code(), e.what(), e.report);
    } catch (const NotFlat& e) {
        return fail(cfg, kNotFlat, e.code(), e.what());
    } catch (const SchemaError& e) {
        return fail(cfg, kBadInput, e.code(), e.what());
    } catch (const BadInput& e) {
        return fail(cfg, kBadInput, e.code(), e.what());
    } catch (const Error& e) {
        return fail(cfg, kRefused, e.code(), e.what());
    } catch (const std::exception& e) {
        return fail(cfg, kBadInput, "schema_error", e.what());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "tconn: exact normal forms, classification and isomorphism decisions\n"
        "for rank-2 (T)-structures over the germs I2(m) and N2"};
    app.require_subcommand(1);

    RunConfig cfg;
    const char* names[] = {"check",    "normalize", "normal-form", "classify",
                           "iso",      "gauge",     "pullback",    "verify"};
    const char* descs[] = {
        "flatness and framing report",
        "reduce to the preliminary form A1 = C1, A2 = C2 + z f E",
        "unique I2(m) normal form of the associated function",
        "N2 classification with certificate chain",
        "decide formal isomorphism of two structures",
        "apply a gauge matrix from a transform file",
        "pull back along a base map from a transform file",
        "replay a gauge certificate and check the residuals"};
    for (int k = 0; k < 8; ++k) {
        auto* sub = app.add_subcommand(names[k], descs[k]);
        sub->add_option("-i,--input", cfg.inputs, "input structure JSON (repeatable)");
        sub->add_option("-o,--output", cfg.output, "output path (default stdout)");
        sub->add_option("--field", cfg.field, "coefficient field: exact | float");
        sub->add_option("--tol", cfg.tol, "tolerance for the float field");
        sub->add_option("--orders", cfg.orders, "expected truncation orders z,t1,t2");
        sub->add_option("--tau1-seed", cfg.tau1_seed,
                        "free constant tau1(0)(0) for normal forms (p or p/q)");
        sub->add_flag("--emit-cert", cfg.emit_cert, "include gauge certificates");
        sub->add_flag("--unchecked", cfg.unchecked, "skip flatness validation");
        if (std::string(names[k]) == "gauge" || std::string(names[k]) == "pullback")
            sub->add_option("-t,--transform", cfg.transform_path, "transform JSON file")
                ->required();
        if (std::string(names[k]) == "verify")
            sub->add_option("--cert", cfg.cert_path, "certificate JSON file")
                ->required();
        sub->callback([&cfg, name = std::string(names[k])] { cfg.subcommand = name; });
    }

    CLI11_PARSE(app, argc, argv);
    return run(std::move(cfg));
}
