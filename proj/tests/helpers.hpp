#pragma once

#include <string>
#include <vector>

#include "relex/config.hpp"
#include "relex/data.hpp"
#include "relex/model.hpp"
#include "relex/rng.hpp"

namespace testutil {

// 10 sentences over 3 entity classes (Per, Org, Loc) and 2 relation classes
// (Works_At, Located_In), with one three-token entity and two sentences whose
// entity pairs carry no relation.
relex::Corpus overfit_corpus();

// 3 sentences that touch every parameter group: a B-I-L entity, a relation of
// each class, and a relation-free entity pair.
relex::Corpus gradient_corpus();

relex::AnnotatedSentence reporter_sentence();

// Shrunk dimensions so forward passes stay cheap.
relex::RunConfig tiny_config();

struct BuiltModel {
  relex::Vocabularies vocab;
  relex::RngSet rng;
  relex::Model model;
  BuiltModel(const relex::RunConfig& config, const relex::Corpus& train)
      : vocab(relex::Vocabularies::build(train)),
        rng(config.seed),
        model(config, vocab, rng.init) {}
};

std::string slurp(const std::string& path);
void spit(const std::string& path, const std::string& text);

// Unique path inside a per-process scratch directory.
std::string temp_path(const std::string& name);

}  // namespace testutil
