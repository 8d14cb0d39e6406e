#pragma once

#include <vector>

#include "prognosis/model.hpp"
#include "prognosis/tree.hpp"

namespace prognosis {

// Tree access for post-hoc analysis (minimal-depth ranking); nullptr when
// the model is not a random forest.
const std::vector<Tree>* forest_trees(const Model& model);

}  // namespace prognosis
