#include <catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "support.hpp"
#include "tconn/json_io.hpp"

using namespace tconn;
using tsup::Rng;
using F = GaussianRational;

namespace {

namespace fs = std::filesystem;

struct CliResult {
    int exit_code;
    std::string out;
};

CliResult run_cli(const std::string& args) {
    std::string cmd = std::string(TCONN_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    int status = pclose(pipe);
    return {WEXITSTATUS(status), out};
}

std::string fixture(const std::string& name) {
    return std::string(TCONN_FIXTURES) + "/" + name;
}

fs::path scratch_dir() {
    auto p = fs::temp_directory_path() / "tconn_cli_test";
    fs::create_directories(p);
    return p;
}

std::string write_file(const std::string& name, const std::string& bytes) {
    auto p = scratch_dir() / name;
    std::ofstream os(p, std::ios::binary);
    os << bytes;
    return p.string();
}

const Orders kOrders{1, 8, 4};
}  // namespace

TEST_CASE("exit code contract, one fixture per code") {
    CHECK(run_cli("check -i " + fixture("ok_n2.json")).exit_code == 0);
    CHECK(run_cli("classify -i " + fixture("refusal_n2.json")).exit_code == 1);
    CHECK(run_cli("check -i " + fixture("missing_germ.json")).exit_code == 2);
    auto nf = run_cli("check -i " + fixture("nonflat_n2.json"));
    CHECK(nf.exit_code == 3);
    auto j = Json::parse(nf.out);
    CHECK(j["error"] == "not_flat");
    CHECK(j.contains("residual_term"));
}

TEST_CASE("refusal reports a machine-readable reason") {
    auto r = run_cli("classify -i " + fixture("refusal_n2.json"));
    auto j = Json::parse(r.out);
    CHECK(j["error"] == "root_not_in_field");
}

TEST_CASE("unchecked flag admits non-flat input") {
    CHECK(run_cli("check -i " + fixture("nonflat_n2.json") + " --unchecked").exit_code == 0);
}

TEST_CASE("TCONN_TOL must be numeric") {
    auto r = run_cli("check -i " + fixture("ok_n2.json"));
    CHECK(r.exit_code == 0);
    CliResult bad = run_cli("check -i " + fixture("ok_n2.json"));
    // environment override path
    std::string cmd = "env TCONN_TOL=abc " + std::string(TCONN_CLI_PATH) +
                      " check -i " + fixture("ok_n2.json") + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    while (fread(buf, 1, sizeof buf, pipe) > 0) {
    }
    CHECK(WEXITSTATUS(pclose(pipe)) == 2);
    (void)bad;
}

TEST_CASE("classify output is byte-identical across runs") {
    auto a = run_cli("classify -i " + fixture("ok_n2.json") + " --emit-cert");
    auto b = run_cli("classify -i " + fixture("ok_n2.json") + " --emit-cert");
    CHECK(a.exit_code == 0);
    CHECK(a.out == b.out);
    CHECK(!a.out.empty());
}

TEST_CASE("normal-form agrees between a normal form and its gauged frame") {
    // f z-independent of degree <= m-4; the gauge [[1, beta], [0, 1]] with
    // beta' = -f produces the z-free frame; both must normalize identically
    const int m = 5;
    Germ g = Germ::I2(m);
    TruncSeries<F> f =
        TruncSeries<F>::constant(kOrders, F::from_int(2)) +
        TruncSeries<F>::monomial(kOrders, 0, 1, 0, F::from_int(3));
    auto s = tsup::normal_form_structure(g, f);
    std::string nf_path = write_file("i2_nf.json", canonical_dump(to_json_structure(s)));

    TruncSeries<F> beta = (-f).antiderivative_t2(F::zero());
    Mat2Series<F> T = Mat2Series<F>::identity(kOrders);
    T.at(1, 2) = beta;
    Json tj;
    tj["T"] = to_json(T);
    std::string t_path = write_file("cox_T.json", canonical_dump(tj));
    std::string gauged_path = (scratch_dir() / "i2_cox.json").string();

    auto g1 = run_cli("gauge -i " + nf_path + " -t " + t_path + " -o " + gauged_path);
    REQUIRE(g1.exit_code == 0);

    auto nf_a = run_cli("normal-form -i " + nf_path);
    auto nf_b = run_cli("normal-form -i " + gauged_path);
    REQUIRE(nf_a.exit_code == 0);
    REQUIRE(nf_b.exit_code == 0);
    auto ja = Json::parse(nf_a.out), jb = Json::parse(nf_b.out);
    CHECK(canonical_dump(ja["ftilde"]) == canonical_dump(jb["ftilde"]));
    CHECK(canonical_dump(ja["ftilde"]) == canonical_dump(to_json(f)));
}

TEST_CASE("iso decides the lambda0 twist and rejects a perturbation") {
    const int r = 4;
    Orders o{1, 8, 3};
    auto t2p = [&](int d) { return TruncSeries<F>::monomial(o, 0, d, 0, F::one()); };
    auto f = t2p(r) +
             (t2p(1).scaled(F::from_int(2)) + t2p(2)).shift_up(Var::z, 1) +
             t2p(0).scaled(F::from_ratio(1, 3)).shift_up(Var::z, 2);
    auto s = tsup::normal_form_structure(Germ::N2(), f);
    // twist slices k >= 1 by lambda0 = i: c_{k,j} -> i^{-(2+j)} c_{k,j}
    F lam0 = F::i();
    auto twisted = TruncSeries<F>(o);
    twisted.set_z_slice(0, t2p(r));
    for (int k = 1; k <= o.z; ++k) {
        TruncSeries<F> sl = f.z_slice(k), out(o);
        for (int j = 0; j <= o.t2; ++j) {
            F scale = F::one();
            for (int q = 0; q < 2 + j; ++q) scale = scale / lam0;
            out.at(0, j, 0) = sl.at(0, j, 0) * scale;
        }
        twisted.set_z_slice(k, out);
    }
    auto st = tsup::normal_form_structure(Germ::N2(), twisted);

    std::string a = write_file("iso_a.json", canonical_dump(to_json_structure(s)));
    std::string b = write_file("iso_b.json", canonical_dump(to_json_structure(st)));
    auto res = run_cli("iso -i " + a + " -i " + b);
    REQUIRE(res.exit_code == 0);
    auto j = Json::parse(res.out);
    CHECK(j["isomorphic"] == true);
    CHECK(j["lambda0"]["r"] == 4);
    CHECK(j["lambda0"]["s"] == 1);
    CHECK(j["lambda0"]["value"] == Json::array({"0", "1", "1", "1"}));

    // +1 on one twisted coefficient flips the decision
    auto broken = twisted;
    broken.at(0, 1, 1) += F::one();
    auto sb = tsup::normal_form_structure(Germ::N2(), broken);
    std::string c = write_file("iso_c.json", canonical_dump(to_json_structure(sb)));
    auto res2 = run_cli("iso -i " + a + " -i " + c);
    REQUIRE(res2.exit_code == 0);
    CHECK(Json::parse(res2.out)["isomorphic"] == false);
}

TEST_CASE("normalize emits a certificate that verify accepts") {
    Rng rng(91);
    Germ g = Germ::N2();
    auto f = tsup::random_n2_f<F>(rng, kOrders);
    auto s = tsup::normal_form_structure(g, f);
    auto T = tsup::random_gauge<F>(rng, kOrders);
    auto moved = gauge_apply(T, s);
    std::string src = write_file("ver_src.json", canonical_dump(to_json_structure(moved)));

    std::string out_path = (scratch_dir() / "ver_pre.json").string();
    auto norm = run_cli("normalize -i " + src + " --emit-cert -o " + out_path);
    REQUIRE(norm.exit_code == 0);
    std::ifstream is(out_path);
    Json pre;
    is >> pre;
    REQUIRE(pre.contains("cert"));
    auto fout = series_from_json<F>(pre["f"], kOrders);
    auto dst_s = tsup::normal_form_structure(g, fout);
    std::string dst = write_file("ver_dst.json", canonical_dump(to_json_structure(dst_s)));
    std::string cert = write_file("ver_cert.json", canonical_dump(pre["cert"]));

    auto ok = run_cli("verify -i " + src + " -i " + dst + " --cert " + cert);
    CHECK(ok.exit_code == 0);
    CHECK(Json::parse(ok.out)["pass"] == true);

    // perturb the certificate: replay must fail with exit 1
    Json broken_cert = pre["cert"];
    REQUIRE(!broken_cert["steps"].empty());
    Json extra;
    extra["type"] = "gauge";
    Json term;
    term["i"] = 1;
    term["j"] = 1;
    term["c"] = Json::array({"2", "1", "0", "1"});
    extra["T"] = Json::array({term});
    broken_cert["steps"].push_back(extra);  // a stray doubling gauge
    std::string bad = write_file("ver_bad.json", canonical_dump(broken_cert));
    auto fail = run_cli("verify -i " + src + " -i " + dst + " --cert " + bad);
    CHECK(fail.exit_code == 1);
    CHECK(Json::parse(fail.out)["pass"] == false);
}

TEST_CASE("pullback subcommand applies a base map") {
    Rng rng(92);
    auto f = tsup::random_n2_f<F>(rng, kOrders);
    auto s = tsup::normal_form_structure(Germ::N2(), f);
    std::string src = write_file("pb_src.json", canonical_dump(to_json_structure(s)));
    auto lam = TruncSeries<F>::monomial(kOrders, 0, 1, 0, F::from_int(2));
    Json tj;
    tj["lambda"] = to_json(lam);
    std::string t_path = write_file("pb_lambda.json", canonical_dump(tj));
    auto res = run_cli("pullback -i " + src + " -t " + t_path);
    REQUIRE(res.exit_code == 0);
    auto back = structure_from_json<F>(Json::parse(res.out));
    auto expect = base_pullback(lam, s);
    CHECK(back.A2 == expect.A2);
}
