#include "gwmv/error.hpp"
#include "gwmv/io.hpp"
#include "gwmv/svg.hpp"
#include "testing.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace gwmv;
using namespace gwmv::testing;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() : path(std::filesystem::temp_directory_path() / "gwmv_io_test") {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

std::string slurp(const std::string& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("real formatting round-trips") {
  auto g = rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int rep = 0; rep < 200; ++rep) {
    const double v = rep % 2 ? u(g) : u(g) * 1e-300;
    CHECK(std::stod(format_real(v)) == v);
  }
  CHECK(format_real(0.5) == "0.5");
}

TEST_CASE("relational matrices survive csv and json") {
  TempDir dir;
  auto g = rng(2);
  for (int rep = 0; rep < 100; ++rep) {
    const RelationalMatrix d(random_dissimilarity(g, 2 + rep % 9, std::pow(10.0, rep % 7 - 3)), MetricTag::geodesic);
    const auto path = dir / ("d" + std::to_string(rep % 3) + ".csv");
    write_relational_csv(path, d);
    const auto back = read_relational_csv(path, MetricTag::geodesic);
    CHECK(back.values() == d.values());
    const auto j = relational_from_json(to_json(d));
    CHECK(j.values() == d.values());
    CHECK(j.tag() == MetricTag::geodesic);
  }
  const Json j = to_json(RelationalMatrix(Matrix::Zero(2, 2), MetricTag::euclidean));
  CHECK(j["n"] == 2);
  CHECK(j["metric_tag"] == "euclidean");
  CHECK(j["values"].size() == 2);
  CHECK(j["values"][0].size() == 2);
}

TEST_CASE("malformed relational csv is rejected") {
  TempDir dir;
  write_text(dir / "ragged.csv", "0,1\n1,0,3\n");
  CHECK_THROWS_AS(read_relational_csv(dir / "ragged.csv"), InvalidInput);
  write_text(dir / "asym.csv", "0,1\n2,0\n");
  CHECK_THROWS_AS(read_relational_csv(dir / "asym.csv"), InvalidInput);
  write_text(dir / "junk.csv", "0,a\na,0\n");
  CHECK_THROWS_AS(read_relational_csv(dir / "junk.csv"), InvalidInput);
  CHECK_THROWS_AS(read_relational_csv(dir / "missing.csv"), InvalidInput);
}

TEST_CASE("couplings survive json") {
  auto g = rng(3);
  for (int rep = 0; rep < 100; ++rep) {
    const Vector a = random_simplex(g, 1 + rep % 5), b = random_simplex(g, 1 + rep % 7);
    const auto c = Coupling::product(a, b);
    const auto back = coupling_from_json(to_json(c));
    CHECK(back.plan == c.plan);
    CHECK(back.a == c.a);
    CHECK(back.b == c.b);
  }
  const Json j = to_json(Coupling::identity(3));
  CHECK(j["n"] == 3);
  CHECK(j["m"] == 3);
  CHECK(j["plan"].size() == 3);
  CHECK(j["plan"][2][2] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("embedding csv and sidecar") {
  TempDir dir;
  auto g = rng(4);
  Embedding e;
  e.coords = normal_matrix(g, 7, 3);
  e.row_ids = {"a", "b", "c", "d", "e", "f", "g"};
  e.method = "gwmds";
  e.seed = 42;
  e.gw_sq = 0.125;
  e.iterations = 17;
  write_embedding_csv(dir / "nested/e.csv", e);
  CHECK(slurp(dir / "nested/e.csv").rfind("id,y1,y2,y3\n", 0) == 0);
  const auto back = read_embedding_csv(dir / "nested/e.csv");
  CHECK(back.coords == e.coords);
  CHECK(back.row_ids == e.row_ids);

  const Json cfg = {{"k", 10}};
  const Json side = embedding_sidecar(e, cfg);
  CHECK(side["method"] == "gwmds");
  CHECK(side["seed"] == 42);
  CHECK(side["gw_sq"] == 0.125);
  CHECK(side["iterations"] == 17);
  CHECK(side["config"] == cfg);
}

TEST_CASE("tables and json files") {
  TempDir dir;
  Matrix v(2, 2);
  v << 1.5, -2, 3, 4e-7;
  write_table_csv(dir / "t.csv", v, {"r1", "r2"}, {"x", "y"});
  CHECK(slurp(dir / "t.csv") == "id,x,y\nr1,1.5,-2\nr2,3,4e-07\n");
  const auto t = read_table_csv(dir / "t.csv");
  CHECK(t.columns == std::vector<std::string>{"x", "y"});
  CHECK(t.ids == std::vector<std::string>{"r1", "r2"});
  CHECK(t.values == v);

  Json j = {{"b", 1}, {"a", {1.0, 2.5}}};
  write_json(dir / "j.json", j);
  CHECK(read_json(dir / "j.json") == j);
  write_text(dir / "bad.json", "{oops");
  CHECK_THROWS_AS(read_json(dir / "bad.json"), InvalidInput);
}

TEST_CASE("scatter svg") {
  auto g = rng(5);
  const Matrix pts = normal_matrix(g, 30, 2);
  Vector color(30);
  for (Index i = 0; i < 30; ++i) color(i) = static_cast<double>(i);
  ScatterStyle style;
  style.title = "demo <&>";
  const auto svg = scatter_svg(pts, color, style);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  std::size_t circles = 0;
  for (std::size_t p = svg.find("<circle"); p != std::string::npos; p = svg.find("<circle", p + 1)) ++circles;
  CHECK(circles == 30);
  CHECK(svg.find("demo &lt;&amp;&gt;") != std::string::npos);
  CHECK(viridis(0.0) != viridis(1.0));
  CHECK(viridis(-5.0) == viridis(0.0));
}
