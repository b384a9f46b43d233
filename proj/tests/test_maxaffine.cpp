#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lcf/grid.hpp"
#include "lcf/maxaffine.hpp"

using namespace lcf;

TEST_CASE("max-affine evaluation: even hinge envelope clamped at zero") {
    MaxAffinePotential ma;
    ma.dim = 1;
    ma.pairs = {{pt(2.0), 1.0}, {pt(0.5), 0.0}};
    // max(0, 2|x| - 1, 0.5|x|)
    REQUIRE(ma.eval(pt(0.0)) == 0.0);
    REQUIRE(ma.eval(pt(0.4)) == 0.2);
    REQUIRE(ma.eval(pt(1.0)) == 1.0);
    REQUIRE(ma.eval(pt(-1.0)) == 1.0);  // even by construction
    REQUIRE(ma.n_pieces() == 4);
    REQUIRE(ma.max_slope() == 2.0);
}

TEST_CASE("project clamps offsets into the admissible cone") {
    MaxAffinePotential ma;
    ma.dim = 1;
    ma.pairs = {{pt(1.0), -0.25}};
    ma.project();
    REQUIRE(ma.pairs[0].b == 0.0);
    REQUIRE_NOTHROW(ma.validate());
}

TEST_CASE("validate rejects malformed potentials") {
    MaxAffinePotential bad_dim;
    bad_dim.dim = 3;
    bad_dim.pairs = {{pt(1.0), 0.0}};
    REQUIRE_THROWS_AS(bad_dim.validate(), std::invalid_argument);

    MaxAffinePotential neg_b;
    neg_b.dim = 1;
    neg_b.pairs = {{pt(1.0), -1.0}};
    REQUIRE_THROWS_AS(neg_b.validate(), std::invalid_argument);

    MaxAffinePotential inf_slope;
    inf_slope.dim = 1;
    inf_slope.pairs = {{pt(std::numeric_limits<double>::infinity()), 0.0}};
    REQUIRE_THROWS_AS(inf_slope.validate(), std::invalid_argument);
}

TEST_CASE("sampling a max-affine potential gives an even A0 grid function") {
    const GridSpec spec = make_grid(1, 6.0, 257);
    const MaxAffinePotential ma = random_max_affine(1, 3, 11);
    const GridFunction g = ma.sample(spec);
    REQUIRE(g.even);
    for (int i = 0; i < spec.n_axis; ++i) {
        REQUIRE(g.at(i) == ma.eval(spec.node(i)));
        REQUIRE(g.at(i) == g.at(spec.n_axis - 1 - i));
        REQUIRE(g.at(i) >= 0.0);
    }
    REQUIRE(g.at(spec.center()) == 0.0);
    REQUIRE(ma.as_logconcave(spec).tag == ClassTag::CLASS_A0);

    const GridSpec spec2 = make_grid(2, 4.0, 33);
    const GridFunction g2 = random_max_affine(2, 4, 12).sample(spec2);
    REQUIRE(g2.even);
    for (int i = 0; i < spec2.n_axis; ++i)
        for (int j = 0; j < spec2.n_axis; ++j)
            REQUIRE(g2.at(i, j) == g2.at(spec2.n_axis - 1 - i, spec2.n_axis - 1 - j));
}

TEST_CASE("random generation is deterministic in the seed and coercive") {
    const MaxAffinePotential a = random_max_affine(1, 4, 99);
    const MaxAffinePotential b = random_max_affine(1, 4, 99);
    REQUIRE(a.pairs.size() == b.pairs.size());
    for (std::size_t i = 0; i < a.pairs.size(); ++i) {
        REQUIRE(a.pairs[i].a == b.pairs[i].a);
        REQUIRE(a.pairs[i].b == b.pairs[i].b);
    }
    const MaxAffinePotential c = random_max_affine(1, 4, 100);
    REQUIRE(a.pairs[0].a != c.pairs[0].a);  // seed actually matters

    // anchor pieces guarantee growth in every direction
    for (int seed = 0; seed < 20; ++seed) {
        const MaxAffinePotential m = random_max_affine(2, 3, seed);
        REQUIRE(m.eval(pt(50.0, 0.0)) > 1.0);
        REQUIRE(m.eval(pt(0.0, 50.0)) > 1.0);
        REQUIRE(m.eval(pt(-50.0, -50.0)) > 1.0);
    }

    REQUIRE_THROWS_AS(random_max_affine(2, 1, 5), std::invalid_argument);
}
