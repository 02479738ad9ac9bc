#include <gtest/gtest.h>

#include <filesystem>

#include "fixtures.hpp"
#include "sfl/labels.hpp"

using namespace sfl;
using namespace sfl::testing;

namespace {

std::vector<LabelLattice> shipped() {
  std::vector<LabelLattice> out;
  for (const auto& f : std::filesystem::directory_iterator(SFL_SOURCE_DIR "/lattices"))
    if (f.path().extension() == ".lat") out.push_back(load_lattice_file(f.path().string()));
  out.push_back(coproduct_with_top(two_point_lattice()));
  return out;
}

LoadErrorKind load_error(const char* text) {
  try {
    load_lattice(text);
  } catch (const LoadError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "loaded: " << text;
  return LoadErrorKind::Syntax;
}

}  // namespace

TEST(Labels, TwoPointTop) {
  auto lat = load_lattice("element Pub\nelement Sec\nflow Pub Sec\n");
  EXPECT_EQ(lat.top(), sec());
  EXPECT_EQ(lat.size(), 2u);
}

TEST(Labels, Singleton) {
  auto lat = load_lattice("element A\n");
  EXPECT_EQ(lat.top(), Label("A"));
  EXPECT_EQ(lat.join(Label("A"), Label("A")), Label("A"));
}

TEST(Labels, LoadErrors) {
  EXPECT_EQ(load_error("element A\nelement B\n"), LoadErrorKind::MissingJoin);
  EXPECT_EQ(load_error(""), LoadErrorKind::Empty);
  EXPECT_EQ(load_error("element A\nelement A\n"), LoadErrorKind::DuplicateElement);
  EXPECT_EQ(load_error("element A\nflow A B\n"), LoadErrorKind::DanglingEdge);
  EXPECT_EQ(load_error("elem A\n"), LoadErrorKind::Syntax);
}

TEST(Labels, FlowsJoinMeet) {
  auto lat = two_point_lattice();
  EXPECT_TRUE(lat.flows(pub(), sec()));
  EXPECT_FALSE(lat.flows(sec(), pub()));
  EXPECT_EQ(lat.join(pub(), sec()), sec());
  EXPECT_EQ(lat.meet({sec()}), sec());
  EXPECT_EQ(lat.meet({pub(), sec()}), pub());
}

TEST(Labels, NoMeetForIncomparablePairUnderTop) {
  auto lat = load_lattice("element A\nelement B\nelement T\nflow A T\nflow B T\n");
  EXPECT_FALSE(lat.meet({Label("A"), Label("B")}).has_value());
  EXPECT_EQ(lat.meet({Label("A"), Label("T")}), Label("A"));
}

TEST(Labels, UnknownLabel) {
  auto lat = two_point_lattice();
  EXPECT_FALSE(lat.contains(Label("Nope")));
  EXPECT_THROW(lat.flows(Label("Nope"), pub()), UnknownLabel);
}

TEST(Labels, Coproduct) {
  auto lat = coproduct_with_top(two_point_lattice());
  EXPECT_EQ(lat.size(), 5u);
  EXPECT_FALSE(lat.flows(inl_label(pub()), inr_label(pub())));
  EXPECT_FALSE(lat.flows(inr_label(pub()), inl_label(pub())));
  EXPECT_EQ(lat.join(inl_label(pub()), inr_label(sec())), coproduct_top());
  EXPECT_TRUE(lat.flows(inl_label(pub()), inl_label(sec())));
  EXPECT_EQ(lat.top(), coproduct_top());
}

TEST(Labels, DescribeRoundTrips) {
  for (const auto& lat : shipped()) {
    auto again = load_lattice(lat.describe());
    ASSERT_EQ(again.size(), lat.size());
    for (Label a : lat.elements())
      for (Label b : lat.elements()) EXPECT_EQ(again.flows(a, b), lat.flows(a, b));
  }
}

TEST(LabelLaws, PartialOrder) {
  for (const auto& lat : shipped()) {
    for (Label a : lat.elements()) {
      EXPECT_TRUE(lat.flows(a, a));
      EXPECT_TRUE(lat.flows(a, lat.top()));
      for (Label b : lat.elements()) {
        if (a != b) {
          EXPECT_FALSE(lat.flows(a, b) && lat.flows(b, a));
        }
        for (Label c : lat.elements())
          if (lat.flows(a, b) && lat.flows(b, c)) {
            EXPECT_TRUE(lat.flows(a, c));
          }
      }
    }
  }
}

TEST(LabelLaws, JoinIsLeastUpperBound) {
  for (const auto& lat : shipped()) {
    for (Label a : lat.elements()) {
      EXPECT_EQ(lat.join(a, a), a);
      EXPECT_EQ(lat.join(a, lat.top()), lat.top());
      for (Label b : lat.elements()) {
        Label j = lat.join(a, b);
        EXPECT_EQ(j, lat.join(b, a));
        EXPECT_TRUE(lat.flows(a, j) && lat.flows(b, j));
        EXPECT_EQ(lat.flows(a, b), j == b);
        for (Label c : lat.elements()) {
          if (lat.flows(a, c) && lat.flows(b, c)) {
            EXPECT_TRUE(lat.flows(j, c));
          }
          EXPECT_EQ(lat.join(lat.join(a, b), c), lat.join(a, lat.join(b, c)));
        }
      }
    }
  }
}

TEST(LabelLaws, MeetIsGreatestLowerBound) {
  for (const auto& lat : shipped()) {
    for (Label a : lat.elements()) {
      for (Label b : lat.elements()) {
        auto m = lat.meet({a, b});
        if (!m) continue;
        EXPECT_TRUE(lat.flows(*m, a) && lat.flows(*m, b));
        for (Label c : lat.elements())
          if (lat.flows(c, a) && lat.flows(c, b)) {
            EXPECT_TRUE(lat.flows(c, *m));
          }
      }
    }
  }
}
