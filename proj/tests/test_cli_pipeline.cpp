#include "hawkes_impact/common.hpp"
