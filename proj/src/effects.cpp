#include "sfl/effects.hpp"

#include <cctype>
#include <sstream>

namespace sfl {

const char* to_string(Alphabet a) { return a == Alphabet::StateExn ? "state-exn" : "pnt"; }
const char* to_string(ComposeMode m) { return m == ComposeMode::GlobalFlow ? "global" : "partial"; }

std::string EffectSet::str() const {
  std::string out = "{";
  auto add = [&](const char* name) {
    if (out.size() > 1) out += ",";
    out += name;
  };
  if (has(kR)) add("R");
  if (has(kW)) add("W");
  if (has(kE)) add("E");
  if (has(kPnt)) add("PNT");
  return out + "}";
}

std::optional<EffectSet> parse_effect_set(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (!s.empty() && s.front() == '{') {
    if (s.back() != '}') return std::nullopt;
    s = s.substr(1, s.size() - 2);
  }
  std::uint8_t bits = 0;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item == "R") bits |= EffectSet::kR;
    else if (item == "W") bits |= EffectSet::kW;
    else if (item == "E") bits |= EffectSet::kE;
    else if (item == "PNT") bits |= EffectSet::kPnt;
    else if (!item.empty()) return std::nullopt;
  }
  return EffectSet(bits);
}

EffectSet full_effect_set(Alphabet a) {
  return a == Alphabet::StateExn ? EffectSet::RWE() : EffectSet::PNT();
}

std::vector<EffectSet> all_effect_sets(Alphabet a) {
  if (a == Alphabet::Pnt) return {EffectSet::empty(), EffectSet::PNT()};
  std::vector<EffectSet> out;
  for (std::uint8_t b = 0; b < 8; ++b) out.emplace_back(b);
  return out;
}

EffectPolicy EffectPolicy::make(LatticePtr lattice, Alphabet alphabet, Label l_state, Label l_exn,
                                std::optional<Label> l_pnt, ComposeMode mode) {
  EffectPolicy p;
  p.lattice_ = std::move(lattice);
  p.alphabet_ = alphabet;
  p.mode_ = mode;
  const LabelLattice& lat = *p.lattice_;
  p.l_pnt_ = l_pnt ? *l_pnt : lat.top();
  p.l_state_ = l_state;
  p.l_exn_ = l_exn;
  for (Label l : {p.l_state_, p.l_exn_, p.l_pnt_})
    if (!lat.contains(l))
      throw PolicyError(PolicyErrorKind::UnknownLabel, "policy label '" + l.name() + "' is not in the lattice");
  if (alphabet == Alphabet::Pnt && mode == ComposeMode::Partial)
    throw PolicyError(PolicyErrorKind::BadValue, "partial composition is defined for state-exn only");
  for (std::uint8_t b = 0; b < 16; ++b) {
    EffectSet eps(b);
    std::vector<Label> parts;
    if (eps.has(EffectSet::kW)) parts.push_back(p.l_state_);
    if (eps.has(EffectSet::kE)) parts.push_back(p.l_exn_);
    if (eps.has(EffectSet::kPnt)) parts.push_back(p.l_pnt_);
    auto m = lat.meet(parts);
    if (!m)
      throw PolicyError(PolicyErrorKind::NoMeet, "no greatest lower bound for effect set " + eps.str());
    p.effect_label_[b] = *m;
  }
  return p;
}

bool EffectPolicy::legal() const {
  if (alphabet_ != Alphabet::StateExn || mode_ != ComposeMode::GlobalFlow) return true;
  return lattice_->flows(l_exn_, l_state_);
}

EffectPolicy EffectPolicy::with_effect_label(EffectSet eps, Label l) const {
  if (!lattice_->contains(l)) throw UnknownLabel(l.name());
  EffectPolicy p = *this;
  p.effect_label_[eps.bits() & 0xf] = l;
  return p;
}

Label EffectPolicy::surface(Label l) const {
  if (inject_.empty()) return l;
  auto it = inject_.find(l.id());
  return it == inject_.end() ? l : it->second;
}

EffectPolicy EffectPolicy::with_injection(std::unordered_map<std::uint32_t, Label> inject) const {
  EffectPolicy p = *this;
  p.inject_ = std::move(inject);
  return p;
}

std::string EffectPolicy::describe() const {
  std::ostringstream os;
  os << "lState=" << l_state_.name() << " lExn=" << l_exn_.name() << " lPnt=" << l_pnt_.name()
     << " mode=" << to_string(mode_);
  return os.str();
}

bool compose(const EffectPolicy& policy, const std::vector<EffectSet>& parts, EffectSet whole) {
  if (parts.empty()) return true;
  if (policy.compose_mode() == ComposeMode::GlobalFlow || parts.size() == 1) {
    EffectSet u;
    for (EffectSet e : parts) u = u | e;
    return u.subset_of(whole);
  }
  // Left fold of the binary partial rule; the accumulated prefix is the
  // union of the parts seen so far.
  const LabelLattice& lat = policy.lattice();
  EffectSet acc = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) {
    EffectSet next = parts[i];
    if (acc.has(EffectSet::kE) && !lat.flows(policy.l_exn(), policy.effect_label(next)))
      return false;
    acc = acc | next;
  }
  return acc.subset_of(whole);
}

EffectSet gamma(const EffectPolicy& policy, Label l) {
  const LabelLattice& lat = policy.lattice();
  if (policy.alphabet() == Alphabet::Pnt)
    return lat.flows(l, policy.l_pnt()) ? EffectSet::PNT() : EffectSet::empty();
  EffectSet out = EffectSet::R();
  if (lat.flows(l, policy.l_state())) out = out | EffectSet::W();
  if (lat.flows(l, policy.l_exn())) out = out | EffectSet::E();
  return out;
}

GaloisReport check_galois(const EffectPolicy& policy) {
  GaloisReport r;
  const LabelLattice& lat = policy.lattice();
  for (Label l : lat.elements()) {
    EffectSet g = gamma(policy, l);
    for (EffectSet eps : all_effect_sets(policy.alphabet())) {
      ++r.cases;
      bool lhs = lat.flows(l, policy.effect_label(eps));
      bool rhs = eps.subset_of(g);
      if (lhs != rhs) {
        r.pass = false;
        r.failures.push_back({l, eps, lhs});
      }
    }
  }
  return r;
}

}  // namespace sfl
