#include "sfl/labels.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <sstream>
#include <unordered_map>

namespace sfl {

namespace {

struct Interner {
  std::mutex mu;
  std::vector<std::unique_ptr<std::string>> names;
  std::unordered_map<std::string, std::uint32_t> ids;
};

Interner& interner() {
  static Interner in;
  return in;
}

}  // namespace

Label::Label(std::string_view name) {
  auto& in = interner();
  std::lock_guard<std::mutex> lock(in.mu);
  std::string key(name);
  auto it = in.ids.find(key);
  if (it != in.ids.end()) {
    id_ = it->second;
    return;
  }
  id_ = static_cast<std::uint32_t>(in.names.size());
  in.names.push_back(std::make_unique<std::string>(key));
  in.ids.emplace(std::move(key), id_);
}

const std::string& Label::name() const {
  static const std::string invalid = "<invalid>";
  if (!valid()) return invalid;
  auto& in = interner();
  std::lock_guard<std::mutex> lock(in.mu);
  return *in.names[id_];
}

const char* to_string(LoadErrorKind k) {
  switch (k) {
    case LoadErrorKind::Syntax: return "Syntax";
    case LoadErrorKind::MissingJoin: return "MissingJoin";
    case LoadErrorKind::NoTop: return "NoTop";
    case LoadErrorKind::DuplicateElement: return "DuplicateElement";
    case LoadErrorKind::DanglingEdge: return "DanglingEdge";
    case LoadErrorKind::Empty: return "Empty";
  }
  return "?";
}

LabelLattice LabelLattice::build(const std::vector<std::string>& elements,
                                 const std::vector<std::pair<std::string, std::string>>& edges) {
  LabelLattice lat;
  if (elements.empty()) throw LoadError(LoadErrorKind::Empty, "lattice has no elements");
  for (const auto& name : elements) {
    Label l(name);
    if (std::find(lat.elems_.begin(), lat.elems_.end(), l) != lat.elems_.end())
      throw LoadError(LoadErrorKind::DuplicateElement, "duplicate element '" + name + "'");
    lat.elems_.push_back(l);
  }
  const int n = static_cast<int>(lat.elems_.size());
  lat.n_ = n;
  std::uint32_t max_id = 0;
  for (Label l : lat.elems_) max_id = std::max(max_id, l.id());
  lat.slot_.assign(max_id + 1, -1);
  for (int i = 0; i < n; ++i) lat.slot_[lat.elems_[i].id()] = i;

  lat.leq_.assign(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i) lat.leq_[i * n + i] = 1;
  for (const auto& [a, b] : edges) {
    int ia = lat.index_of(Label(a));
    int ib = lat.index_of(Label(b));
    if (ia < 0 || ib < 0)
      throw LoadError(LoadErrorKind::DanglingEdge,
                      "edge " + a + " -> " + b + " mentions an undeclared element");
    lat.leq_[ia * n + ib] = 1;
  }
  // Warshall closure.
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      if (lat.leq_[i * n + k])
        for (int j = 0; j < n; ++j)
          if (lat.leq_[k * n + j]) lat.leq_[i * n + j] = 1;

  lat.top_ = -1;
  for (int t = 0; t < n; ++t) {
    bool above_all = true;
    for (int i = 0; i < n && above_all; ++i) above_all = lat.leq_[i * n + t];
    if (above_all) {
      lat.top_ = t;
      break;
    }
  }

  lat.join_.assign(static_cast<std::size_t>(n) * n, -1);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      int best = -1;
      for (int c = 0; c < n; ++c) {
        if (!lat.leq_[a * n + c] || !lat.leq_[b * n + c]) continue;
        bool least = true;
        for (int d = 0; d < n && least; ++d)
          if (lat.leq_[a * n + d] && lat.leq_[b * n + d]) least = lat.leq_[c * n + d];
        if (least) {
          best = c;
          break;
        }
      }
      if (best < 0)
        throw LoadError(LoadErrorKind::MissingJoin, "no least upper bound for " +
                                                        lat.elems_[a].name() + " and " +
                                                        lat.elems_[b].name());
      lat.join_[a * n + b] = best;
    }
  }
  // A finite set with all binary joins has a top; kept as a separate check
  // since the join search above would already fail first.
  if (lat.top_ < 0) throw LoadError(LoadErrorKind::NoTop, "lattice has no top element");
  return lat;
}

int LabelLattice::index_of(Label l) const {
  if (!l.valid() || l.id() >= slot_.size()) return -1;
  return slot_[l.id()];
}

bool LabelLattice::contains(Label l) const { return index_of(l) >= 0; }

bool LabelLattice::flows(Label a, Label b) const {
  int ia = index_of(a), ib = index_of(b);
  if (ia < 0) throw UnknownLabel(a.name());
  if (ib < 0) throw UnknownLabel(b.name());
  return leq_[ia * n_ + ib] != 0;
}

Label LabelLattice::join(Label a, Label b) const {
  int ia = index_of(a), ib = index_of(b);
  if (ia < 0) throw UnknownLabel(a.name());
  if (ib < 0) throw UnknownLabel(b.name());
  return elems_[join_[ia * n_ + ib]];
}

std::optional<Label> LabelLattice::meet(const std::vector<Label>& labels) const {
  if (labels.empty()) return top();
  std::vector<int> idx;
  for (Label l : labels) {
    int i = index_of(l);
    if (i < 0) throw UnknownLabel(l.name());
    idx.push_back(i);
  }
  auto lower = [&](int c) {
    return std::all_of(idx.begin(), idx.end(), [&](int i) { return leq_[c * n_ + i] != 0; });
  };
  for (int c = 0; c < n_; ++c) {
    if (!lower(c)) continue;
    bool greatest = true;
    for (int d = 0; d < n_ && greatest; ++d)
      if (lower(d)) greatest = leq_[d * n_ + c] != 0;
    if (greatest) return elems_[c];
  }
  return std::nullopt;
}

std::vector<Label> LabelLattice::minimal_elements() const {
  std::vector<Label> out;
  for (int c = 0; c < n_; ++c) {
    bool minimal = true;
    for (int d = 0; d < n_ && minimal; ++d)
      if (d != c && leq_[d * n_ + c]) minimal = false;
    if (minimal) out.push_back(elems_[c]);
  }
  return out;
}

std::vector<Label> LabelLattice::up_set(Label a) const {
  int ia = index_of(a);
  if (ia < 0) throw UnknownLabel(a.name());
  std::vector<Label> out;
  for (int c = 0; c < n_; ++c)
    if (leq_[ia * n_ + c]) out.push_back(elems_[c]);
  return out;
}

std::string LabelLattice::describe() const {
  std::ostringstream os;
  for (Label l : elems_) os << "element " << l.name() << "\n";
  for (int a = 0; a < n_; ++a) {
    for (int b = 0; b < n_; ++b) {
      if (a == b || !leq_[a * n_ + b]) continue;
      bool covered = true;  // keep only covering edges
      for (int c = 0; c < n_ && covered; ++c)
        if (c != a && c != b && leq_[a * n_ + c] && leq_[c * n_ + b]) covered = false;
      if (covered) os << "flow " << elems_[a].name() << " " << elems_[b].name() << "\n";
    }
  }
  return os.str();
}

LabelLattice load_lattice(std::string_view text) {
  std::vector<std::string> elements;
  std::vector<std::pair<std::string, std::string>> edges;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw)) continue;
    std::vector<std::string> args;
    for (std::string w; ls >> w;) args.push_back(w);
    if (kw == "element" && args.size() == 1) {
      elements.push_back(args[0]);
    } else if (kw == "flow" && args.size() == 2) {
      edges.emplace_back(args[0], args[1]);
    } else {
      throw LoadError(LoadErrorKind::Syntax,
                      "line " + std::to_string(lineno) + ": expected `element NAME` or `flow A B`");
    }
  }
  return LabelLattice::build(elements, edges);
}

LabelLattice load_lattice_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw LoadError(LoadErrorKind::Syntax, "cannot open lattice file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return load_lattice(ss.str());
}

Label inl_label(Label base) { return Label("inl(" + base.name() + ")"); }
Label inr_label(Label base) { return Label("inr(" + base.name() + ")"); }
Label coproduct_top() { return Label("top*"); }

LabelLattice coproduct_with_top(const LabelLattice& lat) {
  std::vector<std::string> elements;
  std::vector<std::pair<std::string, std::string>> edges;
  for (Label l : lat.elements()) elements.push_back(inl_label(l).name());
  for (Label l : lat.elements()) elements.push_back(inr_label(l).name());
  elements.push_back(coproduct_top().name());
  for (Label a : lat.elements()) {
    for (Label b : lat.elements()) {
      if (a != b && lat.flows(a, b)) {
        edges.emplace_back(inl_label(a).name(), inl_label(b).name());
        edges.emplace_back(inr_label(a).name(), inr_label(b).name());
      }
    }
    edges.emplace_back(inl_label(a).name(), coproduct_top().name());
    edges.emplace_back(inr_label(a).name(), coproduct_top().name());
  }
  return LabelLattice::build(elements, edges);
}

LabelLattice two_point_lattice() { return LabelLattice::build({"Pub", "Sec"}, {{"Pub", "Sec"}}); }

}  // namespace sfl
