#pragma once

#include <istream>
#include <string>
#include <vector>

namespace sdr {

/// Minimal sectioned key = value file with comment lines (';' or '#') and
/// line tracking for error messages.
struct IniFile {
    struct Entry {
        std::string key;
        std::string value;
        int line = 0;
    };
    struct Section {
        std::string name;
        std::vector<Entry> entries;
        int line = 0;
    };

    std::string source = "<memory>";
    std::vector<Section> sections;

    static IniFile parse(std::istream& in, const std::string& source_name);
    static IniFile load(const std::string& path);

    std::string serialize() const;

    const Section* find_section(const std::string& name) const;
    const Entry* find(const std::string& section, const std::string& key) const;

    IniFile& set(const std::string& section, const std::string& key, const std::string& value);
};

}  // namespace sdr
