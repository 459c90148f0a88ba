#include "slh/gf256.hpp"
