#include <gtest/gtest.h>

#include <random>

#include "crnpid/crn.hpp"
#include "crnpid/dsl.hpp"
#include "oracles.hpp"

using namespace crnpid;

TEST(Complex, MergesDuplicateTermsAndSkipsZero) {
  Complex c;
  c.add("A");
  c.add("B", 2);
  c.add("A", 2);
  c.add("C", 0);
  ASSERT_EQ(c.terms().size(), 2u);
  EXPECT_EQ(c.multiplicity("A"), 3);
  EXPECT_EQ(c.multiplicity("B"), 2);
  EXPECT_EQ(c.multiplicity("C"), 0);
  EXPECT_EQ(c.order(), 5);
}

TEST(Complex, EqualityIgnoresOrder) {
  EXPECT_EQ((Complex{{"A", 1}, {"B", 2}}), (Complex{{"B", 2}, {"A", 1}}));
  EXPECT_NE((Complex{{"A", 1}}), (Complex{{"A", 2}}));
}

TEST(Complex, RejectsHugeMultiplicity) {
  Complex c;
  EXPECT_THROW(c.add("A", kMaxMultiplicity + 1), StructuralError);
  c.add("A", kMaxMultiplicity);
  EXPECT_THROW(c.add("A", 1), StructuralError);
  EXPECT_THROW(c.add("A", -1), StructuralError);
}

TEST(SpeciesName, Alphabet) {
  for (const char* ok : {"A", "mRNA", "E+", "Y'-", "blk.P+", "x_1"}) EXPECT_TRUE(is_valid_species_name(ok)) << ok;
  for (const char* bad : {"", "1A", "+", "A B", "A->B", "A{"}) EXPECT_FALSE(is_valid_species_name(bad)) << bad;
}

TEST(Reaction, RejectsNonPositiveRates) {
  EXPECT_THROW(Reaction(Complex{}, Complex{{"A", 1}}, 0.0), StructuralError);
  EXPECT_THROW(Reaction(Complex{}, Complex{{"A", 1}}, -1.0), StructuralError);
  EXPECT_THROW(Reaction(Complex{}, Complex{{"A", 1}}, std::nan("")), StructuralError);
  EXPECT_THROW(Reaction(Complex{}, Complex{{"A", 1}}, INFINITY), StructuralError);
}

TEST(Reaction, Catalytic) {
  EXPECT_TRUE(Reaction(Complex{{"A", 1}}, Complex{{"A", 1}, {"B", 1}}, 1.0).is_catalytic());
  EXPECT_FALSE(Reaction(Complex{{"A", 1}}, Complex{{"B", 1}}, 1.0).is_catalytic());
}

TEST(StateChange, Examples) {
  Crn crn;
  const Reaction ab(Complex{{"A", 1}, {"B", 1}}, Complex{{"C", 2}}, 1.0);
  crn.add_reaction(ab);
  EXPECT_EQ(state_change(ab, crn), (std::vector<int>{-1, -1, 2}));

  Crn cat;
  const Reaction r(Complex{{"X", 1}}, Complex{{"X", 1}, {"Y", 1}}, 1.0);
  cat.add_reaction(r);
  EXPECT_EQ(state_change(r, cat), (std::vector<int>{0, 1}));

  Crn birth;
  const Reaction b(Complex{}, Complex{{"Z", 1}}, 3.0);
  birth.add_reaction(b);
  birth.add_species("W");
  EXPECT_EQ(state_change(b, birth), (std::vector<int>{1, 0}));
}

TEST(MassActionRhs, Examples) {
  // 2A + B -> C at k = 1, state (2, 3, 0): flux 4 * 3 = 12.
  Crn crn;
  crn.add_reaction(Reaction(Complex{{"A", 2}, {"B", 1}}, Complex{{"C", 1}}, 1.0));
  const std::vector<double> x{2.0, 3.0, 0.0};
  EXPECT_EQ(mass_action_rhs(crn, x), (std::vector<double>{-24.0, -12.0, 12.0}));

  const std::vector<double> zero_b{2.0, 0.0, 5.0};
  EXPECT_EQ(mass_action_rhs(crn, zero_b), (std::vector<double>{0.0, 0.0, 0.0}));
}

TEST(MassActionRhs, RejectsDimensionAndNegativeStates) {
  Crn crn;
  crn.add_reaction(Reaction(Complex{{"A", 1}}, Complex{}, 1.0));
  const std::vector<double> two{1.0, 2.0};
  EXPECT_THROW(mass_action_rhs(crn, two), StructuralError);
  const std::vector<double> negative{-1e-3};
  EXPECT_THROW(mass_action_rhs(crn, negative), StructuralError);
  const std::vector<double> tiny_negative{-1e-12};
  EXPECT_NO_THROW(mass_action_rhs(crn, tiny_negative));
}

TEST(MassActionRhs, MatchesDirectEvaluationOnRandomNetworks) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> conc(0.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto doc = oracle::random_document(rng, 8, 12);
    std::vector<double> x(doc.crn.size());
    for (auto& v : x) v = conc(rng);
    const auto got = mass_action_rhs(doc.crn, x);
    const auto want = oracle::direct_rhs(doc.crn, x);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i)
      EXPECT_NEAR(got[i], want[i], 1e-9 * (1.0 + std::abs(want[i]))) << format_crn(doc);
  }
}

// A species at 0 can only grow: every reaction consuming it has zero flux.
TEST(MassActionRhs, NonnegativeAtBoundary) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> conc(0.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto doc = oracle::random_document(rng, 8, 12);
    if (doc.crn.size() == 0) continue;
    std::vector<double> x(doc.crn.size());
    for (auto& v : x) v = conc(rng);
    const std::size_t zeroed = trial % doc.crn.size();
    x[zeroed] = 0.0;
    EXPECT_GE(mass_action_rhs(doc.crn, x)[zeroed], 0.0);
  }
}

TEST(Merge, RhsIsSumOverUnion) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> conc(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = oracle::random_document(rng, 6, 6).crn;
    const auto b = oracle::random_document(rng, 6, 6).crn;
    const Crn u = merge(a, b);
    std::vector<double> x(u.size());
    for (auto& v : x) v = conc(rng);
    auto restrict_to = [&](const Crn& part) {
      std::vector<double> y;
      for (const auto& s : part.species()) y.push_back(x[u.index_of(s)]);
      return y;
    };
    const auto fu = mass_action_rhs(u, x);
    std::vector<double> sum(u.size(), 0.0);
    for (const Crn* part : {&a, &b}) {
      const auto f = mass_action_rhs(*part, restrict_to(*part));
      for (std::size_t i = 0; i < part->size(); ++i) sum[u.index_of(part->species()[i])] += f[i];
    }
    for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(fu[i], sum[i], 1e-9 * (1.0 + std::abs(sum[i])));
  }
}

TEST(Merge, KeepsReactionsOfBoth) {
  Crn a, b;
  a.add_reaction(Reaction(Complex{{"X", 1}}, Complex{}, 1.0));
  b.add_reaction(Reaction(Complex{{"X", 1}}, Complex{{"Y", 1}}, 2.0));
  const Crn u = merge(a, b);
  EXPECT_EQ(u.species(), (std::vector<std::string>{"X", "Y"}));
  EXPECT_EQ(u.reactions().size(), 2u);
}

TEST(Rename, PermutationPermutesRhs) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> conc(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto crn = oracle::random_document(rng, 6, 8).crn;
    std::vector<std::string> target = crn.species();
    std::shuffle(target.begin(), target.end(), rng);
    std::map<std::string, std::string> mapping;
    for (std::size_t i = 0; i < target.size(); ++i) mapping[crn.species()[i]] = target[i];
    const Crn renamed = rename_species(crn, mapping);

    std::vector<double> x(crn.size());
    for (auto& v : x) v = conc(rng);
    std::vector<double> y(renamed.size());
    for (std::size_t i = 0; i < crn.size(); ++i) y[renamed.index_of(mapping[crn.species()[i]])] = x[i];
    const auto fx = mass_action_rhs(crn, x);
    const auto fy = mass_action_rhs(renamed, y);
    for (std::size_t i = 0; i < crn.size(); ++i)
      EXPECT_NEAR(fy[renamed.index_of(mapping[crn.species()[i]])], fx[i], 1e-9 * (1.0 + std::abs(fx[i])));
  }
}

TEST(Rename, RejectsNonInjectiveMapping) {
  Crn crn;
  crn.add_reaction(Reaction(Complex{{"A", 1}}, Complex{{"B", 1}}, 1.0));
  EXPECT_THROW(rename_species(crn, {{"A", "B"}}), StructuralError);
  EXPECT_THROW(rename_species(crn, {{"A", "C"}, {"B", "C"}}), StructuralError);
  EXPECT_NO_THROW(rename_species(crn, {{"A", "B"}, {"B", "A"}}));
}

TEST(Prefix, KeepsListedSpecies) {
  Crn crn;
  crn.add_reaction(Reaction(Complex{{"Y", 1}}, Complex{{"Y", 1}, {"Z", 1}}, 1.0));
  const Crn p = prefix_species(crn, "blk.", {"Y"});
  EXPECT_EQ(p.species(), (std::vector<std::string>{"Y", "blk.Z"}));
}

TEST(MassActionSystem, JacobianMatchesDirectEvaluation) {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> conc(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto crn = oracle::random_document(rng, 6, 10).crn;
    const std::size_t n = crn.size();
    std::vector<double> x(n);
    for (auto& v : x) v = conc(rng);
    std::vector<double> jac(n * n);
    MassActionSystem(crn).jacobian(x, jac);
    const auto want = oracle::direct_jacobian(crn, x);
    for (std::size_t k = 0; k < jac.size(); ++k) EXPECT_NEAR(jac[k], want[k], 1e-9 * (1.0 + std::abs(want[k])));
  }
}

TEST(MassActionSystem, PlantJacobianMatchesFiniteDifference) {
  const Crn crn = parse_crn("0 ->{1} m\nm ->{1} 0\nm ->{1} m + P\nP ->{1} 0\nm + u ->{1} 0\nu ->{1} 0\n0 ->{1} u\n").crn;
  const std::vector<double> x{0.7, 1.3, 0.4};
  std::vector<double> jac(9);
  MassActionSystem(crn).jacobian(x, jac);
  for (std::size_t j = 0; j < 3; ++j) {
    auto xp = x, xm = x;
    xp[j] += 1e-6;
    xm[j] -= 1e-6;
    const auto fp = oracle::direct_rhs(crn, xp);
    const auto fm = oracle::direct_rhs(crn, xm);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(jac[i * 3 + j], (fp[i] - fm[i]) / 2e-6, 1e-8);
  }
}
