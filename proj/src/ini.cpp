#include "sdr/ini.hpp"

#include <fstream>
#include <sstream>

#include "sdr/errors.hpp"

namespace sdr {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

IniFile IniFile::parse(std::istream& in, const std::string& source_name) {
    IniFile file;
    file.source = source_name;
    std::string line;
    int lineno = 0;
    Section* current = nullptr;

    while (std::getline(in, line)) {
        ++lineno;
        const std::string text = trim(line);
        if (text.empty() || text[0] == ';' || text[0] == '#') continue;

        if (text.front() == '[') {
            if (text.back() != ']')
                throw ConfigError(source_name + ":" + std::to_string(lineno) +
                                  ": unterminated section header");
            Section sec;
            sec.name = trim(text.substr(1, text.size() - 2));
            sec.line = lineno;
            if (sec.name.empty())
                throw ConfigError(source_name + ":" + std::to_string(lineno) +
                                  ": empty section name");
            file.sections.push_back(std::move(sec));
            current = &file.sections.back();
            continue;
        }

        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source_name + ":" + std::to_string(lineno) +
                              ": expected 'key = value'");
        if (current == nullptr)
            throw ConfigError(source_name + ":" + std::to_string(lineno) +
                              ": key outside of any [section]");
        Entry entry;
        entry.key = trim(text.substr(0, eq));
        entry.value = trim(text.substr(eq + 1));
        entry.line = lineno;
        if (entry.key.empty())
            throw ConfigError(source_name + ":" + std::to_string(lineno) + ": empty key");
        current->entries.push_back(std::move(entry));
    }
    return file;
}

IniFile IniFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse(in, path);
}

std::string IniFile::serialize() const {
    std::ostringstream out;
    bool first = true;
    for (const auto& sec : sections) {
        if (!first) out << "\n";
        first = false;
        out << "[" << sec.name << "]\n";
        for (const auto& e : sec.entries) out << e.key << " = " << e.value << "\n";
    }
    return out.str();
}

const IniFile::Section* IniFile::find_section(const std::string& name) const {
    for (const auto& s : sections)
        if (s.name == name) return &s;
    return nullptr;
}

const IniFile::Entry* IniFile::find(const std::string& section, const std::string& key) const {
    const Section* sec = find_section(section);
    if (!sec) return nullptr;
    for (const auto& e : sec->entries)
        if (e.key == key) return &e;
    return nullptr;
}

IniFile& IniFile::set(const std::string& section, const std::string& key,
                      const std::string& value) {
    for (auto& s : sections) {
        if (s.name != section) continue;
        for (auto& e : s.entries) {
            if (e.key == key) {
                e.value = value;
                return *this;
            }
        }
        s.entries.push_back({key, value, 0});
        return *this;
    }
    Section sec;
    sec.name = section;
    sec.entries.push_back({key, value, 0});
    sections.push_back(std::move(sec));
    return *this;
}

}  // namespace sdr
