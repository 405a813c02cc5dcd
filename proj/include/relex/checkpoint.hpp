#pragma once

#include <string>

#include "relex/model.hpp"

namespace relex {

// Text archive: header, embedded config, vocabularies, then every parameter
// in registration order with hexfloat values, so save -> load -> save
// reproduces the exact bytes.
std::string checkpoint_to_text(const Model& model);
Model checkpoint_from_text(const std::string& text);

void save_checkpoint(const Model& model, const std::string& path);
Model load_checkpoint(const std::string& path);

}  // namespace relex
