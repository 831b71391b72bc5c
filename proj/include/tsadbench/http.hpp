#pragma once

#include <httplib.h>

// glibc's resolv.h (pulled in by the HTTP client) leaks a `_res` macro that
// mangles unrelated code parsed afterwards, Eigen included.
#ifdef _res
#undef _res
#endif
