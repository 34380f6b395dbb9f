// Copyright 2026 The topocollapse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "topocollapse/scene.h"

namespace topocollapse {

namespace {

struct Token {
    std::string_view text;
    std::size_t column;  // 1-based
};

struct KeyValue {
    std::string_view key;
    std::string_view value;
    std::size_t column;  // column of the value
};

enum class RefKind { Region, Shutter, Pockels };

struct Reference {
    std::string id;
    RefKind kind;
    std::size_t line;
    std::size_t column;
};

bool is_identifier(std::string_view s) {
    if (s.empty()) {
        return false;
    }
    return std::all_of(s.begin(), s.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
    });
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

std::vector<Token> tokenize(std::string_view line) {
    std::vector<Token> out;
    std::size_t k = 0;
    auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; };
    while (k < line.size()) {
        while (k < line.size() && is_space(line[k])) {
            ++k;
        }
        if (k >= line.size()) {
            break;
        }
        std::size_t start = k;
        while (k < line.size() && !is_space(line[k])) {
            ++k;
        }
        out.push_back({line.substr(start, k - start), start + 1});
    }
    return out;
}

class LineParser {
   public:
    LineParser(std::size_t line, std::vector<ParseDiagnostic> &diags) : line_(line), diags_(diags) {}

    void error(std::size_t column, std::string message) {
        diags_.push_back({line_, column, std::move(message)});
        failed_ = true;
    }
    bool failed() const {
        return failed_;
    }
    std::size_t line() const {
        return line_;
    }

    // Splits tokens after the keyword into an optional name and key=value pairs.
    bool split_tokens(const std::vector<Token> &tokens, std::optional<Token> &name, std::vector<KeyValue> &kvs) {
        std::size_t k = 1;
        if (k < tokens.size() && tokens[k].text.find('=') == std::string_view::npos) {
            name = tokens[k];
            ++k;
        }
        std::set<std::string_view> seen;
        for (; k < tokens.size(); ++k) {
            auto eq = tokens[k].text.find('=');
            if (eq == std::string_view::npos) {
                error(tokens[k].column, "expected key=value, found '" + std::string(tokens[k].text) + "'");
                continue;
            }
            auto key = tokens[k].text.substr(0, eq);
            auto value = tokens[k].text.substr(eq + 1);
            if (key.empty()) {
                error(tokens[k].column, "missing key before '='");
                continue;
            }
            if (value.empty()) {
                error(tokens[k].column + eq + 1, "missing value for key '" + std::string(key) + "'");
                continue;
            }
            if (!seen.insert(key).second) {
                error(tokens[k].column, "repeated key '" + std::string(key) + "'");
                continue;
            }
            kvs.push_back({key, value, tokens[k].column + eq + 1});
        }
        return !failed_;
    }

    void check_keys(const std::vector<KeyValue> &kvs, std::initializer_list<std::string_view> allowed,
                    std::string_view keyword) {
        for (const auto &kv : kvs) {
            if (std::find(allowed.begin(), allowed.end(), kv.key) == allowed.end()) {
                error(kv.column - kv.key.size() - 1,
                      "unknown key '" + std::string(kv.key) + "' for " + std::string(keyword));
            }
        }
    }

    const KeyValue *find(const std::vector<KeyValue> &kvs, std::string_view key) {
        for (const auto &kv : kvs) {
            if (kv.key == key) {
                return &kv;
            }
        }
        return nullptr;
    }

    const KeyValue *require(const std::vector<KeyValue> &kvs, std::string_view key, std::string_view keyword,
                            std::size_t column) {
        const auto *kv = find(kvs, key);
        if (kv == nullptr) {
            error(column, std::string(keyword) + " requires " + std::string(key) + "=");
        }
        return kv;
    }

    std::optional<double> number(std::string_view text, std::size_t column) {
        double value = 0.0;
        const char *first = text.data();
        const char *last = text.data() + text.size();
        if (!text.empty() && *first == '+') {
            ++first;
        }
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr != last || first == last || !std::isfinite(value)) {
            error(column, "invalid number '" + std::string(text) + "'");
            return std::nullopt;
        }
        return value;
    }

    std::optional<double> number(const KeyValue *kv) {
        if (kv == nullptr) {
            return std::nullopt;
        }
        return number(kv->value, kv->column);
    }

    std::optional<std::string> identifier(std::string_view text, std::size_t column, std::string_view what) {
        if (!is_identifier(text)) {
            error(column, "invalid " + std::string(what) + " '" + std::string(text) +
                              "' (expected ASCII letters, digits, underscore)");
            return std::nullopt;
        }
        return std::string(text);
    }

    std::optional<std::vector<std::string>> identifier_list(const KeyValue *kv, std::string_view sep_chars,
                                                            std::size_t expected, std::string_view what) {
        if (kv == nullptr) {
            return std::nullopt;
        }
        auto parts = split(kv->value, sep_chars.front());
        if (expected != 0 && parts.size() != expected) {
            error(kv->column, std::string(kv->key) + " expects " + std::to_string(expected) + " " +
                                  std::string(what) + "s separated by '" + std::string(sep_chars) + "'");
            return std::nullopt;
        }
        std::vector<std::string> out;
        std::size_t offset = 0;
        for (auto part : parts) {
            auto id = identifier(part, kv->column + offset, what);
            if (!id) {
                return std::nullopt;
            }
            out.push_back(*id);
            offset += part.size() + 1;
        }
        return out;
    }

    std::optional<std::vector<double>> number_list(const KeyValue *kv) {
        if (kv == nullptr) {
            return std::nullopt;
        }
        std::vector<double> out;
        std::size_t offset = 0;
        for (auto part : split(kv->value, ',')) {
            auto v = number(part, kv->column + offset);
            if (!v) {
                return std::nullopt;
            }
            out.push_back(*v);
            offset += part.size() + 1;
        }
        return out;
    }

   private:
    std::size_t line_;
    std::vector<ParseDiagnostic> &diags_;
    bool failed_ = false;
};

class SceneParser {
   public:
    ParsedScene run(std::string_view text) {
        ParsedScene out;
        for (auto raw : split(text, '\n')) {
            out.lines.emplace_back(raw);
        }
        for (std::size_t k = 0; k < out.lines.size(); ++k) {
            parse_line(k + 1, out.lines[k]);
        }
        if (!doc_.source) {
            diags_.push_back({1, 1, "missing source declaration"});
        }
        resolve_references();
        if (!diags_.empty()) {
            std::stable_sort(diags_.begin(), diags_.end(),
                             [](const auto &a, const auto &b) { return a.line < b.line; });
            throw SceneParseError(std::move(diags_));
        }
        out.doc = std::move(doc_);
        out.line_of = std::move(declared_);
        return out;
    }

   private:
    void parse_line(std::size_t line_no, std::string_view line) {
        auto hash = line.find('#');
        if (hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        auto tokens = tokenize(line);
        if (tokens.empty()) {
            return;
        }
        LineParser p(line_no, diags_);
        std::optional<Token> name;
        std::vector<KeyValue> kvs;
        if (!p.split_tokens(tokens, name, kvs)) {
            return;
        }
        auto keyword = tokens[0].text;
        auto kw_col = tokens[0].column;

        if (keyword == "constants" || keyword == "scene") {
            // handled below
        } else if (!name) {
            p.error(kw_col, std::string(keyword_known(keyword) ? "" : "unknown keyword ") + "'" +
                                std::string(keyword) + "'" + (keyword_known(keyword) ? " requires a name" : ""));
            return;
        }

        if (keyword == "scene") {
            parse_scene_line(p, name, kvs, kw_col);
        } else if (keyword == "constants") {
            parse_constants(p, name, kvs);
        } else if (keyword == "meta") {
            parse_meta(p, *name, kvs);
        } else if (keyword == "region" || keyword == "fiber") {
            parse_region(p, keyword, *name, kvs, kw_col);
        } else if (keyword == "source") {
            parse_source(p, *name, kvs, kw_col);
        } else if (keyword == "passage") {
            parse_passage(p, *name, kvs, kw_col);
        } else if (keyword == "close" || keyword == "open") {
            parse_transition(p, keyword, *name, kvs, kw_col);
        } else if (keyword == "voltage") {
            parse_voltage(p, *name, kvs, kw_col);
        } else if (auto kind = parse_component_kind(keyword)) {
            parse_component(p, *kind, *name, kvs, kw_col);
        } else {
            p.error(kw_col, "unknown keyword '" + std::string(keyword) + "'");
        }
    }

    static bool keyword_known(std::string_view keyword) {
        static const std::set<std::string_view> known = {
            "scene", "constants", "meta", "region", "fiber", "source", "passage", "close", "open", "voltage",
            "beamsplitter", "phaseshifter", "mirror", "polarizer", "pockels", "shutter", "detector", "screen"};
        return known.count(keyword) != 0;
    }

    bool declare(LineParser &p, const Token &name, std::string_view what) {
        auto id = p.identifier(name.text, name.column, std::string(what) + " name");
        if (!id) {
            return false;
        }
        auto [it, inserted] = declared_.emplace(*id, p.line());
        if (!inserted) {
            p.error(name.column, "duplicate identifier '" + *id + "' (first declared on line " +
                                     std::to_string(it->second) + ")");
            return false;
        }
        return true;
    }

    void refer(const std::string &id, RefKind kind, std::size_t line, std::size_t column) {
        references_.push_back({id, kind, line, column});
    }

    void parse_scene_line(LineParser &p, const std::optional<Token> &name, const std::vector<KeyValue> &kvs,
                          std::size_t col) {
        p.check_keys(kvs, {}, "scene");
        if (!name) {
            p.error(col, "scene requires a name");
            return;
        }
        if (saw_scene_) {
            p.error(col, "duplicate scene declaration");
            return;
        }
        auto id = p.identifier(name->text, name->column, "scene name");
        if (id) {
            saw_scene_ = true;
            doc_.name = *id;
        }
    }

    void parse_constants(LineParser &p, const std::optional<Token> &name, const std::vector<KeyValue> &kvs) {
        if (name) {
            p.error(name->column, "constants takes no name");
            return;
        }
        p.check_keys(kvs, {"speed", "packet"}, "constants");
        if (auto v = p.number(p.find(kvs, "speed"))) {
            doc_.propagation_speed = *v;
        }
        if (auto v = p.number(p.find(kvs, "packet"))) {
            doc_.packet_duration = *v;
        }
    }

    void parse_meta(LineParser &p, const Token &name, const std::vector<KeyValue> &kvs) {
        p.check_keys(kvs, {"value"}, "meta");
        auto key = p.identifier(name.text, name.column, "metadata key");
        const auto *value = p.require(kvs, "value", "meta", name.column);
        if (!key || value == nullptr || p.failed()) {
            return;
        }
        if (!doc_.metadata.emplace(*key, std::string(value->value)).second) {
            p.error(name.column, "duplicate metadata key '" + *key + "'");
        }
    }

    void parse_region(LineParser &p, std::string_view keyword, const Token &name, const std::vector<KeyValue> &kvs,
                      std::size_t col) {
        bool fiber = keyword == "fiber";
        if (fiber) {
            p.check_keys(kvs, {"path", "length"}, keyword);
        } else {
            p.check_keys(kvs, {"path"}, keyword);
        }
        RegionSpec r;
        r.id = std::string(name.text);
        if (const auto *path = p.find(kvs, "path")) {
            if (auto id = p.identifier(path->value, path->column, "path label")) {
                r.path = *id;
            }
        }
        if (fiber) {
            r.length = p.number(p.require(kvs, "length", keyword, col));
        }
        if (p.failed() || !declare(p, name, keyword)) {
            return;
        }
        doc_.regions.push_back(std::move(r));
    }

    void parse_source(LineParser &p, const Token &name, const std::vector<KeyValue> &kvs, std::size_t col) {
        p.check_keys(kvs, {"region", "pol", "amp", "phase", "time"}, "source");
        auto regions = p.identifier_list(p.require(kvs, "region", "source", col), ",", 0, "region");
        const auto *pol_kv = p.require(kvs, "pol", "source", col);
        if (!regions || pol_kv == nullptr || p.failed()) {
            return;
        }
        std::vector<Polarization> pols;
        for (auto part : split(pol_kv->value, ',')) {
            auto pol = parse_polarization(part);
            if (!pol) {
                p.error(pol_kv->column, "polarization must be H or V, found '" + std::string(part) + "'");
                return;
            }
            pols.push_back(*pol);
        }
        auto n = regions->size();
        if (pols.size() == 1) {
            pols.resize(n, pols.front());
        }
        std::vector<double> amps(n, n == 1 ? 1.0 : 1.0 / std::sqrt(static_cast<double>(n)));
        std::vector<double> phases(n, 0.0);
        if (const auto *kv = p.find(kvs, "amp")) {
            if (auto list = p.number_list(kv)) {
                amps = *list;
            }
        }
        if (const auto *kv = p.find(kvs, "phase")) {
            if (auto list = p.number_list(kv)) {
                phases = *list;
            }
        }
        if (pols.size() != n || amps.size() != n || phases.size() != n) {
            p.error(col, "source lists region, pol, amp, phase must have equal lengths");
        }
        SourceSpec s;
        s.id = std::string(name.text);
        if (const auto *kv = p.find(kvs, "time")) {
            if (auto t = p.number(kv)) {
                s.time = *t;
            }
        }
        if (p.failed()) {
            return;
        }
        if (doc_.source) {
            p.error(col, "duplicate source declaration (exactly one source allowed)");
            return;
        }
        if (!declare(p, name, "source")) {
            return;
        }
        const auto *region_kv = p.find(kvs, "region");
        for (std::size_t k = 0; k < n; ++k) {
            s.terms.push_back({(*regions)[k], pols[k], amps[k], phases[k]});
            refer((*regions)[k], RefKind::Region, p.line(), region_kv->column);
        }
        doc_.source = std::move(s);
    }

    void parse_passage(LineParser &p, const Token &name, const std::vector<KeyValue> &kvs, std::size_t col) {
        p.check_keys(kvs, {"between", "pass"}, "passage");
        const auto *between = p.require(kvs, "between", "passage", col);
        auto ends = p.identifier_list(between, ":", 2, "region");
        PassageSpec ps;
        ps.id = std::string(name.text);
        if (const auto *pass = p.find(kvs, "pass")) {
            if (pass->value == "open") {
                ps.condition = PassCondition::open();
            } else if (pass->value == "closed") {
                ps.condition = PassCondition::closed();
            } else if (auto pol = parse_polarization(pass->value)) {
                ps.condition = PassCondition::polarized_only(*pol);
            } else {
                p.error(pass->column, "pass must be open, closed, H or V");
            }
        }
        if (!ends || p.failed() || !declare(p, name, "passage")) {
            return;
        }
        ps.a = (*ends)[0];
        ps.b = (*ends)[1];
        refer(ps.a, RefKind::Region, p.line(), between->column);
        refer(ps.b, RefKind::Region, p.line(), between->column);
        doc_.passages.push_back(std::move(ps));
    }

    void parse_transition(LineParser &p, std::string_view keyword, const Token &name, const std::vector<KeyValue> &kvs,
                          std::size_t col) {
        p.check_keys(kvs, {"at"}, keyword);
        auto target = p.identifier(name.text, name.column, "shutter name");
        auto at = p.number(p.require(kvs, "at", keyword, col));
        if (!target || !at || p.failed()) {
            return;
        }
        doc_.shutter_transitions.push_back({*target, keyword == "close", *at});
        refer(*target, RefKind::Shutter, p.line(), name.column);
    }

    void parse_voltage(LineParser &p, const Token &name, const std::vector<KeyValue> &kvs, std::size_t col) {
        p.check_keys(kvs, {"on", "off"}, "voltage");
        auto target = p.identifier(name.text, name.column, "pockels cell name");
        auto on = p.number(p.require(kvs, "on", "voltage", col));
        auto off = p.number(p.require(kvs, "off", "voltage", col));
        if (!target || !on || !off || p.failed()) {
            return;
        }
        doc_.pockels_windows.push_back({*target, *on, *off});
        refer(*target, RefKind::Pockels, p.line(), name.column);
    }

    void parse_component(LineParser &p, ComponentKind kind, const Token &name, const std::vector<KeyValue> &kvs,
                         std::size_t col) {
        ComponentSpec c;
        c.kind = kind;
        c.id = std::string(name.text);
        auto keyword = to_string(kind);
        std::vector<std::pair<std::string, std::size_t>> refs;
        auto take_between = [&]() {
            const auto *kv = p.require(kvs, "between", keyword, col);
            if (auto ends = p.identifier_list(kv, ":", 2, "region")) {
                c.inputs = {(*ends)[0]};
                c.outputs = {(*ends)[1]};
                c.location = (*ends)[0];
                refs.emplace_back((*ends)[0], kv->column);
                refs.emplace_back((*ends)[1], kv->column);
            }
        };
        auto take_region = [&](const KeyValue *kv) {
            if (kv == nullptr) {
                return;
            }
            if (auto id = p.identifier(kv->value, kv->column, "region")) {
                c.location = *id;
                refs.emplace_back(*id, kv->column);
            }
        };

        switch (kind) {
            case ComponentKind::BeamSplitter: {
                p.check_keys(kvs, {"in", "out"}, keyword);
                const auto *in_kv = p.require(kvs, "in", keyword, col);
                const auto *out_kv = p.require(kvs, "out", keyword, col);
                auto in = p.identifier_list(in_kv, ",", 2, "region");
                auto out = p.identifier_list(out_kv, ",", 2, "region");
                if (in && out) {
                    c.inputs = *in;
                    c.outputs = *out;
                    c.location = c.inputs[0];
                    for (const auto &r : c.inputs) {
                        refs.emplace_back(r, in_kv->column);
                    }
                    for (const auto &r : c.outputs) {
                        refs.emplace_back(r, out_kv->column);
                    }
                }
                break;
            }
            case ComponentKind::PhaseShifter:
                p.check_keys(kvs, {"between", "phi"}, keyword);
                take_between();
                if (auto v = p.number(p.require(kvs, "phi", keyword, col))) {
                    c.phase = *v;
                }
                break;
            case ComponentKind::Mirror:
                p.check_keys(kvs, {"between"}, keyword);
                take_between();
                break;
            case ComponentKind::Polarizer: {
                p.check_keys(kvs, {"between", "axis"}, keyword);
                take_between();
                if (const auto *kv = p.require(kvs, "axis", keyword, col)) {
                    if (auto pol = parse_polarization(kv->value)) {
                        c.axis = *pol;
                    } else {
                        p.error(kv->column, "axis must be H or V");
                    }
                }
                break;
            }
            case ComponentKind::PockelsCell:
                p.check_keys(kvs, {"between", "region"}, keyword);
                if (p.find(kvs, "between") != nullptr && p.find(kvs, "region") != nullptr) {
                    p.error(col, "pockels takes either between= or region=, not both");
                } else if (p.find(kvs, "region") != nullptr) {
                    take_region(p.find(kvs, "region"));
                } else {
                    take_between();
                }
                break;
            case ComponentKind::Shutter: {
                p.check_keys(kvs, {"between", "response", "state"}, keyword);
                take_between();
                if (auto v = p.number(p.require(kvs, "response", keyword, col))) {
                    c.response = *v;
                }
                if (const auto *kv = p.find(kvs, "state")) {
                    if (kv->value == "closed") {
                        c.initially_closed = true;
                    } else if (kv->value != "open") {
                        p.error(kv->column, "state must be open or closed");
                    }
                }
                break;
            }
            case ComponentKind::Detector: {
                p.check_keys(kvs, {"region"}, keyword);
                const auto *kv = p.require(kvs, "region", keyword, col);
                take_region(kv);
                if (kv != nullptr && !c.location.empty()) {
                    c.inputs = {c.location};
                }
                break;
            }
            case ComponentKind::Screen: {
                p.check_keys(kvs, {"inputs", "separation", "distance", "wavelength", "sigma", "halfwidth", "bins"},
                             keyword);
                const auto *in_kv = p.require(kvs, "inputs", keyword, col);
                if (auto in = p.identifier_list(in_kv, ",", 2, "region")) {
                    c.inputs = *in;
                    c.location = c.inputs[0];
                    for (const auto &r : c.inputs) {
                        refs.emplace_back(r, in_kv->column);
                    }
                }
                ScreenParams sp;
                auto read = [&](std::string_view key, double &slot) {
                    if (auto v = p.number(p.require(kvs, key, keyword, col))) {
                        slot = *v;
                    }
                };
                read("separation", sp.separation);
                read("distance", sp.distance);
                read("wavelength", sp.wavelength);
                read("sigma", sp.sigma);
                read("halfwidth", sp.halfwidth);
                double bins = 0.0;
                read("bins", bins);
                if (!p.failed()) {
                    if (bins != std::floor(bins) || bins < 0 || bins > 1e6) {
                        p.error(p.find(kvs, "bins")->column, "bins must be a non-negative integer");
                    } else {
                        sp.bins = static_cast<int>(bins);
                    }
                }
                c.screen = sp;
                break;
            }
        }
        if (p.failed() || !declare(p, name, keyword)) {
            return;
        }
        for (const auto &[id, column] : refs) {
            refer(id, RefKind::Region, p.line(), column);
        }
        doc_.components.push_back(std::move(c));
    }

    void resolve_references() {
        std::set<std::string> regions;
        for (const auto &r : doc_.regions) {
            regions.insert(r.id);
        }
        std::map<std::string, ComponentKind> components;
        for (const auto &c : doc_.components) {
            components.emplace(c.id, c.kind);
        }
        for (const auto &ref : references_) {
            bool ok = false;
            std::string expected;
            switch (ref.kind) {
                case RefKind::Region:
                    ok = regions.count(ref.id) != 0;
                    expected = "region";
                    break;
                case RefKind::Shutter: {
                    auto it = components.find(ref.id);
                    ok = it != components.end() && it->second == ComponentKind::Shutter;
                    expected = "shutter";
                    break;
                }
                case RefKind::Pockels: {
                    auto it = components.find(ref.id);
                    ok = it != components.end() && it->second == ComponentKind::PockelsCell;
                    expected = "pockels cell";
                    break;
                }
            }
            if (!ok) {
                diags_.push_back({ref.line, ref.column, "unresolved reference '" + ref.id + "' (expected " + expected + ")"});
            }
        }
    }

    SceneDoc doc_;
    bool saw_scene_ = false;
    std::map<std::string, std::size_t> declared_;
    std::vector<Reference> references_;
    std::vector<ParseDiagnostic> diags_;
};

std::string join_messages(const std::vector<ParseDiagnostic> &diags) {
    std::ostringstream out;
    for (std::size_t k = 0; k < diags.size(); ++k) {
        if (k != 0) {
            out << '\n';
        }
        out << to_string(diags[k]);
    }
    return out.str();
}

}  // namespace

std::string to_string(const ParseDiagnostic &d) {
    return "line " + std::to_string(d.line) + ", column " + std::to_string(d.column) + ": " + d.message;
}

SceneParseError::SceneParseError(std::vector<ParseDiagnostic> diagnostics)
    : std::runtime_error(join_messages(diagnostics)), diagnostics_(std::move(diagnostics)) {}

ParsedScene parse_scene_annotated(std::string_view text) {
    return SceneParser().run(text);
}

SceneDoc parse_scene(std::string_view text) {
    return parse_scene_annotated(text).doc;
}

}  // namespace topocollapse
