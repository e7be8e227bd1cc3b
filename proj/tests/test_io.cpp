#include <doctest.h>

#include <cmath>
#include <limits>

#include "delayadm/error.hpp"
#include "delayadm/io.hpp"

using namespace delayadm;

TEST_CASE("doubles are printed with 17 significant digits and round trip") {
  CHECK(format_double(1.0) == "1.0000000000000000e+00");
  CHECK(format_double(-0.1) == "-1.0000000000000001e-01");
  const double x = 0.1 + 0.2;
  CHECK(std::stod(format_double(x)) == x);
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("json emitter keeps key order and writes numbers in fixed format") {
  Json j = Json::object();
  j["b"] = 1.5;
  j["a"] = Json::array({1, 2});
  j["nan"] = std::nan("");
  const std::string s = dump_json(j);
  CHECK(s.find("\"b\"") < s.find("\"a\""));
  CHECK(s.find("1.5000000000000000e+00") != std::string::npos);
  CHECK(s.find("null") != std::string::npos);
  CHECK(s == dump_json(j));
}

TEST_CASE("matrix parsing accepts real and complex entries") {
  const CMatrix m = matrix_from_json(Json::parse("[[1, [0, 2]], [3.5, -1]]"), "A");
  CHECK(m.rows() == 2);
  CHECK(m(0, 1) == cplx(0, 2));
  CHECK(matrix_from_json(Json::parse("2"), "A")(0, 0) == cplx(2, 0));
  CHECK_THROWS_AS(matrix_from_json(Json::parse("[[1, 2], [3]]"), "A"), ConfigError);
  CHECK_THROWS_AS(matrix_from_json(Json::parse("[[\"x\"]]"), "A"), ConfigError);
  const CMatrix back = matrix_from_json(matrix_to_json(m), "A");
  CHECK((back - m).norm() == 0.0);
}

TEST_CASE("lifted states serialize and parse back exactly") {
  CVector x(2);
  x << cplx(0.1, -0.2), cplx(1.0 / 3.0, 0.0);
  LiftedState v = LiftedState::constant(x, 5);
  v.tail.set_node(1, CVector::Constant(2, cplx(std::sqrt(2.0), 1e-300)));
  const LiftedState w = state_from_json(Json::parse(dump_json(state_to_json(v))));
  CHECK((w.coordinates() - v.coordinates()).norm() == 0.0);
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(hex64(fnv1a64("")) == "cbf29ce484222325");
  CHECK(hex64(fnv1a64("a")) == "af63dc4c8601ec8c");
}
