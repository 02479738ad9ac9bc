#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sfl {

// Interned label name. Equality is name equality.
class Label {
 public:
  Label() = default;
  explicit Label(std::string_view name);

  const std::string& name() const;
  std::uint32_t id() const { return id_; }
  bool valid() const { return id_ != kInvalid; }

  friend bool operator==(Label a, Label b) { return a.id_ == b.id_; }
  friend bool operator!=(Label a, Label b) { return a.id_ != b.id_; }
  friend bool operator<(Label a, Label b) { return a.name() < b.name(); }

 private:
  static constexpr std::uint32_t kInvalid = 0xffffffffu;
  std::uint32_t id_ = kInvalid;
};

enum class LoadErrorKind { Syntax, MissingJoin, NoTop, DuplicateElement, DanglingEdge, Empty };

const char* to_string(LoadErrorKind k);

class LoadError : public std::runtime_error {
 public:
  LoadError(LoadErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  LoadErrorKind kind() const { return kind_; }

 private:
  LoadErrorKind kind_;
};

class UnknownLabel : public std::runtime_error {
 public:
  explicit UnknownLabel(const std::string& name)
      : std::runtime_error("unknown label '" + name + "'"), name_(name) {}
  const std::string& label_name() const { return name_; }

 private:
  std::string name_;
};

// Finite join-semilattice. Immutable once built.
class LabelLattice {
 public:
  // Builds from names and declared edges (a flows to b). Computes the
  // reflexive-transitive closure, all joins, and the top element.
  static LabelLattice build(const std::vector<std::string>& elements,
                            const std::vector<std::pair<std::string, std::string>>& edges);

  const std::vector<Label>& elements() const { return elems_; }
  std::size_t size() const { return elems_.size(); }
  bool contains(Label l) const;
  Label top() const { return elems_[top_]; }

  bool flows(Label a, Label b) const;
  Label join(Label a, Label b) const;
  // Greatest lower bound of a nonempty set, if one exists.
  std::optional<Label> meet(const std::vector<Label>& labels) const;
  // Elements with nothing strictly below them.
  std::vector<Label> minimal_elements() const;
  // Elements b with flows(a, b).
  std::vector<Label> up_set(Label a) const;

  // Text form accepted by load_lattice (transitive reduction of the order).
  std::string describe() const;

  int index_of(Label l) const;
  bool flows_idx(int a, int b) const { return leq_[a * n_ + b] != 0; }
  int join_idx(int a, int b) const { return join_[a * n_ + b]; }

 private:
  std::vector<Label> elems_;
  std::vector<int> slot_;  // label id -> index, -1 if absent
  std::vector<std::uint8_t> leq_;
  std::vector<int> join_;
  int n_ = 0;
  int top_ = 0;
};

using LatticePtr = std::shared_ptr<const LabelLattice>;

// Parses `element NAME` / `flow A B` lines; `#` starts a comment.
LabelLattice load_lattice(std::string_view text);
LabelLattice load_lattice_file(const std::string& path);

// Two disjoint copies inl(l), inr(l) of the input plus a fresh top `top*`.
LabelLattice coproduct_with_top(const LabelLattice& lat);
Label inl_label(Label base);
Label inr_label(Label base);
Label coproduct_top();

// Pub flows to Sec.
LabelLattice two_point_lattice();

}  // namespace sfl
