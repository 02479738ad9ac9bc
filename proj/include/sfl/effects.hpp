#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "sfl/labels.hpp"

namespace sfl {

enum class Alphabet { StateExn, Pnt };
enum class ComposeMode { GlobalFlow, Partial };

const char* to_string(Alphabet a);
const char* to_string(ComposeMode m);

// Subset of {R, W, E, PNT} stored as a bitmask.
class EffectSet {
 public:
  static constexpr std::uint8_t kR = 1, kW = 2, kE = 4, kPnt = 8;

  constexpr EffectSet() = default;
  constexpr explicit EffectSet(std::uint8_t bits) : bits_(bits) {}

  static constexpr EffectSet empty() { return EffectSet(0); }
  static constexpr EffectSet R() { return EffectSet(kR); }
  static constexpr EffectSet W() { return EffectSet(kW); }
  static constexpr EffectSet E() { return EffectSet(kE); }
  static constexpr EffectSet PNT() { return EffectSet(kPnt); }
  static constexpr EffectSet RW() { return EffectSet(kR | kW); }
  static constexpr EffectSet RE() { return EffectSet(kR | kE); }
  static constexpr EffectSet RWE() { return EffectSet(kR | kW | kE); }

  constexpr std::uint8_t bits() const { return bits_; }
  constexpr bool is_empty() const { return bits_ == 0; }
  constexpr bool has(std::uint8_t bit) const { return (bits_ & bit) != 0; }
  constexpr bool subset_of(EffectSet o) const { return (bits_ & ~o.bits_) == 0; }

  constexpr EffectSet operator|(EffectSet o) const { return EffectSet(bits_ | o.bits_); }
  constexpr EffectSet operator-(EffectSet o) const { return EffectSet(bits_ & ~o.bits_); }
  constexpr bool operator==(EffectSet o) const { return bits_ == o.bits_; }
  constexpr bool operator!=(EffectSet o) const { return bits_ != o.bits_; }

  // "{}", "{R,W}", "{PNT}".
  std::string str() const;

 private:
  std::uint8_t bits_ = 0;
};

// Parses "{R,W}" / "R,W" / "{}" / "PNT"; nullopt on bad input.
std::optional<EffectSet> parse_effect_set(const std::string& text);

// Every subset of the alphabet, in increasing bitmask order.
std::vector<EffectSet> all_effect_sets(Alphabet a);
EffectSet full_effect_set(Alphabet a);

enum class PolicyErrorKind { NoMeet, UnknownLabel, BadValue };

class PolicyError : public std::runtime_error {
 public:
  PolicyError(PolicyErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  PolicyErrorKind kind() const { return kind_; }

 private:
  PolicyErrorKind kind_;
};

// Label assignment for effects over a fixed lattice.
class EffectPolicy {
 public:
  EffectPolicy() = default;

  // Validates labels and precomputes effect_label for every subset.
  static EffectPolicy make(LatticePtr lattice, Alphabet alphabet, Label l_state, Label l_exn,
                           std::optional<Label> l_pnt, ComposeMode mode);

  const LabelLattice& lattice() const { return *lattice_; }
  const LatticePtr& lattice_ptr() const { return lattice_; }
  Alphabet alphabet() const { return alphabet_; }
  ComposeMode compose_mode() const { return mode_; }
  Label l_state() const { return l_state_; }
  Label l_exn() const { return l_exn_; }
  Label l_pnt() const { return l_pnt_; }

  // The greatest lower bound of the component labels; R contributes top.
  Label effect_label(EffectSet eps) const { return effect_label_[eps.bits() & 0xf]; }

  // GlobalFlow state-exn policies need l_exn to flow to l_state.
  bool legal() const;

  // Replaces the label of one effect set (negative controls and the
  // coproduct construction).
  EffectPolicy with_effect_label(EffectSet eps, Label l) const;

  // Maps a source label to the label its `label[..]` expression types at.
  // Identity unless an injection is installed.
  Label surface(Label l) const;
  EffectPolicy with_injection(std::unordered_map<std::uint32_t, Label> inject) const;
  bool has_injection() const { return !inject_.empty(); }

  std::string describe() const;

 private:
  LatticePtr lattice_;
  Alphabet alphabet_ = Alphabet::StateExn;
  ComposeMode mode_ = ComposeMode::GlobalFlow;
  Label l_state_, l_exn_, l_pnt_;
  std::array<Label, 16> effect_label_{};
  std::unordered_map<std::uint32_t, Label> inject_;
};

// Effector composition <parts> >= whole.
bool compose(const EffectPolicy& policy, const std::vector<EffectSet>& parts, EffectSet whole);

// {R} + {W | l flows l_state} + {E | l flows l_exn}; Pnt: {PNT | l flows l_pnt}.
EffectSet gamma(const EffectPolicy& policy, Label l);

struct GaloisWitness {
  Label label;
  EffectSet effects;
  bool label_side;  // value of flows(label, effect_label(effects))
};

struct GaloisReport {
  bool pass = true;
  std::size_t cases = 0;
  std::vector<GaloisWitness> failures;
};

GaloisReport check_galois(const EffectPolicy& policy);

}  // namespace sfl
