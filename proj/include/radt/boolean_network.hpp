#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "radt/rng.hpp"

namespace radt {

using GeneState = std::vector<std::uint8_t>;

/// Boolean gene-regulatory network with asynchronous update semantics.
/// Rules are data, loaded from a text file of lines
///   gene_name := <expression over gene names with AND/OR/NOT and parens>
/// Gene order in the file defines bit order of the state string, leftmost
/// gene first.
class BooleanNetwork {
 public:
  static BooleanNetwork from_file(const std::string& path);
  static BooleanNetwork from_string(const std::string& text);

  int n_genes() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& gene_names() const { return names_; }

  /// Value gene g's rule dictates given the current state.
  bool eval_rule(int gene, const GeneState& state) const;

  /// One asynchronous update: a uniformly chosen gene is set to its rule
  /// value; all others stay.
  void async_update(GeneState& state, Rng& rng) const;

  /// True iff every gene already equals its rule value (stable attractor).
  bool is_attractor(const GeneState& state) const;

  /// Exhaustive scan of all 2^n states; requires n_genes <= 20.
  std::vector<GeneState> enumerate_attractors() const;

  std::string to_bitstring(const GeneState& state) const;
  GeneState from_bitstring(const std::string& bits) const;

  struct Expr;  // rule AST node; definition lives with the parser

 private:
  std::vector<std::string> names_;
  std::vector<std::shared_ptr<const Expr>> rules_;
};

/// One environment transition: flip genes[gene_index] (the perturbation),
/// then apply k asynchronous updates.
GeneState cardio_step(const BooleanNetwork& net, const GeneState& genes,
                      int gene_index, Rng& rng, int k);

}  // namespace radt
