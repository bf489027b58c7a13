#include <gtest/gtest.h>

#include <filesystem>
#include <numbers>

#include "seba/io.hpp"

using namespace seba;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("seba-io-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Fnv1a, ReferenceVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ull);
  EXPECT_EQ(hex64(0xabcull), "0000000000000abc");
}

TEST(FormatReal, RoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, std::numbers::pi, 1e-300, -2.5e17, 123456.789})
    EXPECT_EQ(detail::parse_real(format_real(x), "test"), x);
}

TEST(NormsCsv, ExactLayout) {
  const auto spec = enumerate_norms(DiagonalForm::parse("1,1"), 10.0);
  const auto text = norms_csv(spec);
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "# seba-norms v1 dim=2 coeffs=1,1 cutoff=10 merge_tol=" + format_real(spec.merge_tol()));
  EXPECT_EQ(text.substr(text.find('\n') + 1), "0,1\n1,4\n2,4\n4,4\n5,8\n8,4\n9,4\n10,8\n");
}

TEST(NormsCsv, RoundTrip) {
  for (const char* f : {"1.6180339887498949,0.6180339887498949", "1,1.4142135623730951,1.7320508075688772", "1/3,2"}) {
    const auto spec = enumerate_norms(DiagonalForm::parse(f), 200.0);
    const auto back = parse_norms_csv(norms_csv(spec));
    EXPECT_EQ(back.norms(), spec.norms());
    EXPECT_EQ(back.mults(), spec.mults());
    EXPECT_EQ(back.cutoff(), spec.cutoff());
    EXPECT_EQ(back.merge_tol(), spec.merge_tol());
    EXPECT_EQ(back.form().coeffs(), spec.form().coeffs());
    EXPECT_EQ(back.form().is_exact(), spec.form().is_exact());
    EXPECT_EQ(norms_csv(back), norms_csv(spec));
  }
}

TEST(NormsCsv, SchemaErrors) {
  const std::string body = "0,1\n1,4\n";
  const std::string good = "# seba-norms v1 dim=2 coeffs=1,1 cutoff=2 merge_tol=0\n";
  EXPECT_NO_THROW(parse_norms_csv(good + body));
  try {
    parse_norms_csv("# seba-norms v2 dim=2 coeffs=1,1 cutoff=2 merge_tol=0\n" + body);
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("v2"), std::string::npos);
  }
  EXPECT_THROW(parse_norms_csv("# seba-perturbed v1 phi=1 tol=1 xmax=1\n"), SchemaError);
  EXPECT_THROW(parse_norms_csv(""), SchemaError);
  EXPECT_THROW(parse_norms_csv("# seba-norms v1 dim=3 coeffs=1,1 cutoff=2 merge_tol=0\n" + body), SchemaError);
  EXPECT_THROW(parse_norms_csv("# seba-norms v1 dim=2 coeffs=1,1 merge_tol=0\n" + body), SchemaError);
  EXPECT_THROW(parse_norms_csv(good + "0,1\n1,x\n"), SchemaError);
  EXPECT_THROW(parse_norms_csv(good + "0,1\n1,4,5\n"), SchemaError);
  EXPECT_THROW(parse_norms_csv(good + "0,1\n2,4\n1,4\n"), SchemaError);
  EXPECT_THROW(parse_norms_csv(good + "0,1\n3,4\n"), SchemaError);
  EXPECT_THROW(parse_norms_csv(good + "1,4\n"), SchemaError);
}

TEST(PerturbedCsv, RoundTrip) {
  const auto spec = enumerate_norms(DiagonalForm::parse("1,1"), 400.0);
  const auto p = solve_spectrum(spec, ScattererPhase(2.0), 200.0);
  const auto text = perturbed_csv(p);
  EXPECT_EQ(text.substr(0, text.find('\n')), "# seba-perturbed v1 phi=2 tol=" + format_real(1e-12) + " xmax=200");
  const auto back = parse_perturbed_csv(text);
  EXPECT_EQ(back.lambdas, p.lambdas);
  EXPECT_EQ(back.residuals, p.residuals);
  EXPECT_EQ(back.d, p.d);
  EXPECT_EQ(back.phi, p.phi);
  EXPECT_EQ(back.x_max, p.x_max);
  EXPECT_EQ(perturbed_csv(back), text);
}

TEST(PerturbedCsv, SchemaErrors) {
  const std::string good = "# seba-perturbed v1 phi=1 tol=1e-12 xmax=1\n";
  EXPECT_NO_THROW(parse_perturbed_csv(good + "0,-1,0,1\n"));
  EXPECT_THROW(parse_perturbed_csv("# seba-perturbed v0 phi=1 tol=1e-12 xmax=1\n"), SchemaError);
  EXPECT_THROW(parse_perturbed_csv(good + "1,-1,0,1\n"), SchemaError);
  EXPECT_THROW(parse_perturbed_csv(good + "0,-1,0\n"), SchemaError);
  EXPECT_THROW(parse_perturbed_csv("# seba-perturbed v1 tol=1e-12 xmax=1\n"), SchemaError);
}

TEST(HeatCsv, Columns) {
  HeatTracePoint p;
  p.beta = 0.5;
  p.A_tilde = 2.0;
  const auto text = heat_csv({p});
  EXPECT_EQ(text, "beta,a_tilde,difference_form,discrepancy,scaled_2d,scaled_3d\n0.5,2,0,0,0,0\n");
}

TEST(AtomicWrite, ReplacesWithoutLeftovers) {
  const auto path = scratch("atomic.txt");
  atomic_write(path, "first");
  atomic_write(path, "second");
  EXPECT_EQ(read_file(path), "second");
  for (const auto& e : fs::directory_iterator(path.parent_path()))
    EXPECT_EQ(e.path().string().find(".tmp."), std::string::npos) << e.path();
  EXPECT_THROW(atomic_write(path.parent_path() / "no-such-dir" / "x.txt", "data"), IoError);
  EXPECT_THROW(read_file(path.parent_path() / "missing.txt"), IoError);
  fs::remove_all(path.parent_path());
}

TEST(JsonReports, TraceFields) {
  TraceCheckReport r;
  r.beta = 0.1;
  r.budget.quad = 1e-12;
  const auto j = to_json(r);
  for (const char* k : {"beta", "sigma", "lhs", "smooth", "diffractive", "rhs", "abs_error", "budget"})
    EXPECT_TRUE(j.contains(k)) << k;
  for (const char* k : {"quad", "trunc_m", "trunc_s", "spectral"}) EXPECT_TRUE(j["budget"].contains(k)) << k;
  EXPECT_EQ(j["budget"]["quad"].get<double>(), 1e-12);
}
