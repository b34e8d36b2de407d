#include <doctest.h>

#include <json.hpp>

#include "shearflow/config.hpp"
#include "shearflow/error.hpp"

using namespace shearflow;
using nlohmann::json;

namespace {
json minimal_config() {
    return json{
        {"geometry", {{"L", 6.283185307179586}, {"h", {{"type", "constant"}, {"value", 1.0}}}}},
        {"basis", {{"K", 2}, {"M", 3}}},
        {"physics", {{"nu", 1.0}, {"s", 1.0}, {"lambda", 0.2}}},
        {"potential", {{"name", "pressure_drop"}}},
        {"integration",
         {{"dt", 1e-3}, {"t_end", 1.0}, {"v0", {{"type", "zero"}}}, {"seed", 7}}},
    };
}
}  // namespace

TEST_CASE("minimal config resolves with documented defaults and round-trips") {
    const RunConfig cfg = parse_config_json(minimal_config());
    CHECK(cfg.K == 2);
    CHECK(cfg.n_mollify == 32);          // numerical-policy default
    CHECK(cfg.scan.lo == -50.0);
    CHECK(cfg.energy_tol_coeff == 10.0);
    CHECK(cfg.seed == 7);
    CHECK(cfg.lift_alpha == 1.0);

    // parse(echo) == echo: the resolved form is a fixed point
    const json echo = cfg.resolved();
    const RunConfig cfg2 = parse_config_json(echo);
    CHECK(cfg2.resolved() == echo);
    CHECK(cfg2.content_hash() == cfg.content_hash());
}

TEST_CASE("unknown keys are rejected with their path") {
    json j = minimal_config();
    j["physics"]["viscosty"] = 1.0;
    try {
        (void)parse_config_json(j);
        FAIL("expected UnknownKey");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnknownKey);
        CHECK(e.witness() == "physics.viscosty");
    }
    json top = minimal_config();
    top["physic"] = json::object();
    CHECK_THROWS_AS((void)parse_config_json(top), Error);
}

TEST_CASE("type and range errors carry the key path") {
    json j = minimal_config();
    j["integration"]["dt"] = -1e-3;
    try {
        (void)parse_config_json(j);
        FAIL("expected ConfigType");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ConfigType);
        CHECK(e.witness() == "integration.dt");
    }
    j = minimal_config();
    j["basis"]["K"] = "four";
    CHECK_THROWS_AS((void)parse_config_json(j), Error);
}

TEST_CASE("missing physics block is a MissingBlock error") {
    json j = minimal_config();
    j.erase("physics");
    try {
        (void)parse_config_json(j);
        FAIL("expected MissingBlock");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingBlock);
        CHECK(e.witness() == "config.physics");
    }
    j = minimal_config();
    j["physics"].erase("nu");
    CHECK_THROWS_AS((void)parse_config_json(j), Error);
}

TEST_CASE("potential specs parse: builtins and piecewise") {
    json j = minimal_config();
    j["potential"] = {{"name", "gaussian_well"}, {"alpha", 1.5}, {"n_mollify", 16}};
    RunConfig cfg = parse_config_json(j);
    CHECK(cfg.potential.name == "gaussian_well");
    CHECK(cfg.potential.pieces[0].gauss_amp == 1.5);
    CHECK(cfg.n_mollify == 16);

    j["potential"] = {{"name", "piecewise"},
                      {"breakpoints", {0.0}},
                      {"pieces",
                       {{{"poly", {0.0, -1.0}}}, {{"poly", {0.0, 1.0}}}}}};
    cfg = parse_config_json(j);
    CHECK(cfg.potential.pieces.size() == 2);
    CHECK(cfg.potential.value(-2.0) == doctest::Approx(2.0));

    j["potential"] = {{"name", "maxwell"}};
    CHECK_THROWS_AS((void)parse_config_json(j), Error);
}

TEST_CASE("v0 specs parse and pick up the seed") {
    json j = minimal_config();
    j["integration"]["v0"] = {{"type", "random_H_ball"}, {"radius", 2.5}};
    const RunConfig cfg = parse_config_json(j);
    CHECK(cfg.v0.kind == InitialCondition::Kind::RandomHBall);
    CHECK(cfg.v0.radius == 2.5);
    CHECK(cfg.v0.seed == 7);

    j["integration"]["v0"] = {{"type", "eigenmode"}, {"mode", 3}, {"amp", 0.5}};
    CHECK(parse_config_json(j).v0.mode == 3);

    j["integration"]["v0"] = {{"type", "warm"}};
    CHECK_THROWS_AS((void)parse_config_json(j), Error);
}

TEST_CASE("flow parameters mirror the config") {
    json j = minimal_config();
    j["integration"]["convection"] = false;
    j["integration"]["checkpoint_every"] = 100;
    const RunConfig cfg = parse_config_json(j);
    const FlowParameters p = cfg.flow_parameters();
    CHECK(p.nu == 1.0);
    CHECK(p.convection_enabled == false);
    CHECK(p.boundary_enabled == true);
    CHECK(p.checkpoint_every == 100);
    CHECK(p.dt == 1e-3);
}
