#include <doctest.h>

#include "vhc/model_file.hpp"

using namespace vhc;

TEST_CASE("reduced model file round-trip") {
    ModelFile mf = parse_model_text(R"ini(
# a comment
[reduced]
psi1 = "sin(2*s)/(2+cos(s))"   # trailing comment
psi2 = "-sin(s)/(2+cos(s))"
topology = circle
period = 2*pi

[options]
N = 512
quad_tol = 1e-9
)ini");
    CHECK_FALSE(mf.is_full);
    CHECK(mf.reduced.topology == Topology::Circle);
    CHECK(mf.reduced.period == doctest::Approx(6.283185307179586));
    CHECK(mf.options.N == 512);
    CHECK(mf.options.quad_tol == 1e-9);
    CHECK(mf.reduced.psi1(0.0) == doctest::Approx(0.0));
    CHECK(mf.reduced.psi2(0.0) == doctest::Approx(0.0));
}

TEST_CASE("line topology") {
    ModelFile mf = parse_model_text(R"ini(
[reduced]
psi1 = "-sin(s)"
psi2 = "0"
topology = line
)ini");
    CHECK(mf.reduced.topology == Topology::Line);
}

TEST_CASE("validation errors") {
    // both sections
    CHECK_THROWS_AS(parse_model_text("[reduced]\npsi1=\"0\"\npsi2=\"0\"\ntopology=line\n"
                                     "[full]\nn = 2\ntopology=line\n"),
                    ModelError);
    // neither section
    CHECK_THROWS_AS(parse_model_text("[options]\nN = 128\n"), ModelError);
    // missing period on the circle
    CHECK_THROWS_AS(parse_model_text("[reduced]\npsi1=\"0\"\npsi2=\"0\"\ntopology=circle\n"),
                    ModelError);
    // period forbidden on the line
    CHECK_THROWS_AS(
        parse_model_text("[reduced]\npsi1=\"0\"\npsi2=\"0\"\ntopology=line\nperiod=1\n"),
        ModelError);
    // unknown key
    CHECK_THROWS_AS(
        parse_model_text("[reduced]\npsi1=\"0\"\npsi2=\"0\"\nbogus=\"1\"\ntopology=line\n"),
        ModelError);
    // syntax error inside an expression is reported with the file line
    try {
        parse_model_text("[reduced]\npsi1 = \"sin(\"\npsi2 = \"0\"\ntopology = line\n", "m.model");
        FAIL("expected ModelError");
    } catch (const ModelError& e) {
        CHECK(std::string(e.what()).find("m.model:2") != std::string::npos);
    }
    // unknown identifier in an expression
    CHECK_THROWS_AS(
        parse_model_text("[reduced]\npsi1=\"x+1\"\npsi2=\"0\"\ntopology=line\n"),
        ModelError);
    // unterminated string
    CHECK_THROWS_AS(parse_model_text("[reduced]\npsi1 = \"sin(s)\npsi2=\"0\"\ntopology=line\n"),
                    ModelError);
    // non-periodic expressions on the circle are rejected at the seam
    CHECK_THROWS_AS(
        parse_model_text("[reduced]\npsi1=\"s\"\npsi2=\"0\"\ntopology=circle\nperiod=2*pi\n"),
        ModelError);
}

TEST_CASE("full model file with matrix keys") {
    ModelFile mf = parse_model_text(R"ini(
[full]
n = 2
D.1.1 = "1"
D.1.2 = "0"
D.2.1 = "0"
D.2.2 = "1"
P = "0"
B.1.1 = "q1"
B.2.1 = "q2"
Bperp.1 = "-q2"
Bperp.2 = "q1"
h.1 = "sqrt(q1^2+q2^2)-1"
sigma.1 = "cos(s)"
sigma.2 = "sin(s)"
topology = circle
period = 2*pi
)ini");
    REQUIRE(mf.is_full);
    CHECK(mf.full->n() == 2);
    validate_model(*mf.full);
    ReducedDynamics rd = reduced_of(mf);
    CHECK(std::fabs(rd.psi1(1.0)) <= 1e-12);
    // missing entry
    CHECK_THROWS_AS(parse_model_text(R"ini(
[full]
n = 2
D.1.1 = "1"
topology = line
)ini"),
                    ModelError);
    // out-of-range index
    CHECK_THROWS_AS(parse_model_text(R"ini(
[full]
n = 2
D.1.1 = "1"
D.1.2 = "0"
D.2.1 = "0"
D.2.2 = "1"
D.3.1 = "0"
P = "0"
B.1.1 = "q1"
B.2.1 = "q2"
Bperp.1 = "-q2"
Bperp.2 = "q1"
h.1 = "sqrt(q1^2+q2^2)-1"
sigma.1 = "cos(s)"
sigma.2 = "sin(s)"
topology = circle
period = 2*pi
)ini"),
                    ModelError);
}
