#pragma once

#include <memory>
#include <string>

#include "sfl/effects.hpp"
#include "sfl/labels.hpp"
#include "sfl/syntax.hpp"
#include "sfl/typecheck.hpp"

namespace sfl::testing {

inline LatticePtr two_point() { return std::make_shared<const LabelLattice>(two_point_lattice()); }

inline Label pub() { return Label("Pub"); }
inline Label sec() { return Label("Sec"); }

inline Setting state_exn(const char* l_state, const char* l_exn, Type sigma = ty::unit(),
                         ComposeMode mode = ComposeMode::GlobalFlow) {
  return Setting{EffectPolicy::make(two_point(), Alphabet::StateExn, Label(l_state), Label(l_exn),
                                    std::nullopt, mode),
                 std::move(sigma)};
}

inline Setting pnt(const char* l_pnt) {
  return Setting{EffectPolicy::make(two_point(), Alphabet::Pnt, pub(), pub(), Label(l_pnt),
                                    ComposeMode::GlobalFlow),
                 nullptr};
}

inline Type T(const std::string& text, const Type& sigma = nullptr) {
  static const LabelLattice lat = two_point_lattice();
  return parse_type(text, &lat, sigma);
}

inline Expr E(const std::string& text, const Type& sigma = nullptr) {
  static const LabelLattice lat = two_point_lattice();
  return parse_expr(text, &lat, sigma);
}

}  // namespace sfl::testing
