#pragma once

namespace sdgibm {

inline const char* version_string() { return "0.1.0"; }

}  // namespace sdgibm
