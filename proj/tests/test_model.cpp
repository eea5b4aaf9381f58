#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "grash/model.hpp"

using namespace grash;

TEST_CASE("init_model ranges, determinism and size") {
    auto m = init_model(Scorer::ComplEx, 4, 3, 2, 0.5, 7);
    CHECK(m.entity.size() == 12);
    for (double v : m.entity) {
        CHECK(v >= -0.5);
        CHECK(v <= 0.5);
    }
    auto m2 = init_model(Scorer::ComplEx, 4, 3, 2, 0.5, 7);
    CHECK(m.entity == m2.entity);
    CHECK(m.relation == m2.relation);

    // Model size in stored values is (n_entities + n_relations) * dim.
    auto big = init_model(Scorer::TransE, 8, 10, 4, 0.1, 1);
    CHECK(big.entity.size() + big.relation.size() == (10 + 4) * 8);

    CHECK_THROWS_AS(init_model(Scorer::ComplEx, 5, 3, 2, 0.5, 7), std::invalid_argument);
    CHECK_THROWS_AS(init_model(Scorer::RotatE, 7, 3, 2, 0.5, 7), std::invalid_argument);

    auto rot = init_model(Scorer::RotatE, 4, 3, 2, 0.5, 7);
    CHECK(rot.relation.size() == 2 * 2);  // d/2 phases per relation
    for (double v : rot.relation) {
        CHECK(v >= 0.0);
        CHECK(v < 2 * 3.14159265358979 + 1e-9);
    }
}

TEST_CASE("TransE translational identity scores zero") {
    auto m = init_model(Scorer::TransE, 6, 2, 1, 0.3, 11);
    for (uint32_t j = 0; j < 6; ++j) {
        m.entity_row(1)[j] = m.entity_row(0)[j] + m.relation_row(0)[j];
    }
    CHECK(score(m, 0, 0, 1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(score(m, 0, 0, 0) <= 0.0);  // never positive
}

TEST_CASE("RotatE identity rotation scores zero") {
    auto m = init_model(Scorer::RotatE, 6, 2, 1, 0.3, 13);
    for (uint32_t j = 0; j < 3; ++j) m.relation_row(0)[j] = 0.0;
    for (uint32_t j = 0; j < 6; ++j) m.entity_row(1)[j] = m.entity_row(0)[j];
    CHECK(score(m, 0, 0, 1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(score(m, 0, 0, 0) <= 0.0);
}

TEST_CASE("ComplEx matches a hand-computed evaluation") {
    // dim 2 = one complex pair. Re((sr+i si)(pr+i pi)(or-i oi)).
    EmbeddingModel m;
    m.scorer = Scorer::ComplEx;
    m.dim = 2;
    m.n_entities = 2;
    m.n_relations = 1;
    m.entity = {0.3, -0.7, 0.2, 0.5};  // e0=(0.3-0.7i), e1=(0.2+0.5i)
    m.relation = {-0.4, 0.6};          // p0=(-0.4+0.6i)
    double sr = 0.3, si = -0.7, pr = -0.4, pi = 0.6, orr = 0.2, oi = 0.5;
    double expected = sr * pr * orr + si * pi * orr + sr * pi * oi - si * pr * oi;
    CHECK(score(m, 0, 0, 1) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("ComplEx score is linear in the subject embedding") {
    auto m = init_model(Scorer::ComplEx, 8, 3, 2, 0.4, 17);
    double base = score(m, 0, 1, 2);
    for (double& v : m.entity_row(0)) v *= 2.5;
    CHECK(score(m, 0, 1, 2) == doctest::Approx(2.5 * base).epsilon(1e-12));
}

TEST_CASE("score_candidates equals elementwise score() calls") {
    for (Scorer scorer : {Scorer::ComplEx, Scorer::TransE, Scorer::RotatE}) {
        auto m = init_model(scorer, 8, 10, 3, 0.4, 23);
        auto sp = score_candidates(m, Direction::SPx, 4, 1);
        auto po = score_candidates(m, Direction::xPO, 7, 2);
        REQUIRE(sp.size() == 10);
        for (uint32_t c = 0; c < 10; ++c) {
            CHECK(sp[c] == score(m, 4, 1, c));
            CHECK(po[c] == score(m, c, 2, 7));
        }
    }
}

TEST_CASE("TransE with all entities identical yields a constant candidate vector") {
    auto m = init_model(Scorer::TransE, 4, 5, 1, 0.2, 29);
    for (uint32_t e = 1; e < 5; ++e) {
        for (uint32_t j = 0; j < 4; ++j) m.entity_row(e)[j] = m.entity_row(0)[j];
    }
    auto v = score_candidates(m, Direction::SPx, 0, 0);
    for (double x : v) CHECK(x == doctest::Approx(v[0]));
}

TEST_CASE("score_backward matches central finite differences") {
    const double h = 1e-6;
    for (Scorer scorer : {Scorer::ComplEx, Scorer::TransE, Scorer::RotatE}) {
        auto m = init_model(scorer, 8, 3, 2, 0.4, 31);
        uint32_t s = 0, p = 1, o = 2;
        std::vector<double> gs(m.dim, 0.0), gp(m.relation_width(), 0.0), go(m.dim, 0.0);
        score_backward(m.scorer, m.transe_norm, m.entity_row(s), m.relation_row(p),
                       m.entity_row(o), 1.0, gs, gp, go);
        auto check_entry = [&](double* entry, double analytic) {
            double saved = *entry;
            *entry = saved + h;
            double up = score(m, s, p, o);
            *entry = saved - h;
            double down = score(m, s, p, o);
            *entry = saved;
            double fd = (up - down) / (2 * h);
            CHECK(analytic == doctest::Approx(fd).epsilon(1e-4));
        };
        for (uint32_t j = 0; j < m.dim; ++j) check_entry(&m.entity_row(s)[j], gs[j]);
        for (uint32_t j = 0; j < m.relation_width(); ++j) check_entry(&m.relation_row(p)[j], gp[j]);
        for (uint32_t j = 0; j < m.dim; ++j) check_entry(&m.entity_row(o)[j], go[j]);
    }
}

TEST_CASE("checkpoint round-trips bit-exactly") {
    auto m = init_model(Scorer::RotatE, 8, 12, 3, 0.3, 37);
    auto path = (std::filesystem::temp_directory_path() / "grash_ckpt.bin").string();
    save_checkpoint(m, path);
    auto back = load_checkpoint(path);
    std::filesystem::remove(path);
    CHECK(back.scorer == m.scorer);
    CHECK(back.dim == m.dim);
    CHECK(back.entity == m.entity);
    CHECK(back.relation == m.relation);
}
