// material.hpp is header-only; this TU anchors it in the library.
#include "psafem/material.hpp"
