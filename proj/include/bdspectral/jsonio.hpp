#pragma once

#include <cstdio>
#include <ostream>
#include <string>

namespace bdspectral {

/// 17-significant-digit decimal rendering of a double; round-trips to the
/// identical 64-bit value under strtod.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Minimal streaming JSON writer with insertion-ordered keys and the fixed
/// numeric rendering above, so repeated runs emit byte-identical documents.
class JsonWriter {
  public:
    explicit JsonWriter(std::ostream& os) : os_(os) {}

    JsonWriter& begin_object() { return token("{", true); }
    JsonWriter& end_object() { fresh_ = false; os_ << "}"; return *this; }
    JsonWriter& begin_array() { return token("[", true); }
    JsonWriter& end_array() { fresh_ = false; os_ << "]"; return *this; }

    JsonWriter& key(const std::string& k) {
        separate();
        os_ << '"' << k << "\":";
        fresh_ = true;
        return *this;
    }

    JsonWriter& value(double v) { return token(fmt_double(v), false); }
    JsonWriter& value(int v) { return token(std::to_string(v), false); }
    JsonWriter& value(bool v) { return token(v ? "true" : "false", false); }
    JsonWriter& value(const std::string& s) { return token("\"" + s + "\"", false); }

  private:
    JsonWriter& token(const std::string& t, bool opens) {
        separate();
        os_ << t;
        fresh_ = opens;
        return *this;
    }
    void separate() {
        if (!fresh_) os_ << ",";
        fresh_ = true;
    }

    std::ostream& os_;
    bool fresh_ = true;
};

}  // namespace bdspectral
