#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <unistd.h>

#include "json.hpp"

namespace leff {

struct CachedValue {
    double re = 0.0;
    double im = 0.0;
    double est_error = 0.0;
};

// Write to a temporary sibling, then rename over the target.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot write " + tmp.string());
        os << content;
        if (!os) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

// Matrix-element cache: "op|B=1|m=(...)|m'=(...)|arg=..." -> {re, im, est_error}.
class ElementCache {
public:
    ElementCache() = default;
    explicit ElementCache(std::filesystem::path file) : file_(std::move(file)) { load(); }

    static std::string key(const std::string& op, const std::string& m, const std::string& mp, double arg) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", arg);
        return op + "|B=1|m=(" + m + ")|m'=(" + mp + ")|arg=" + buf;
    }

    std::optional<CachedValue> find(const std::string& k) const {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = map_.find(k);
        if (it == map_.end()) return std::nullopt;
        return it->second;
    }

    void put(const std::string& k, CachedValue v) {
        std::lock_guard<std::mutex> lk(mu_);
        auto [it, inserted] = map_.insert_or_assign(k, v);
        (void)it;
        dirty_ = true;
    }

    double get_or_compute(const std::string& k, const std::function<CachedValue()>& fn) {
        if (auto v = find(k)) return v->re;
        CachedValue v = fn();
        put(k, v);
        return v.re;
    }

    size_t size() const {
        std::lock_guard<std::mutex> lk(mu_);
        return map_.size();
    }

    void load() {
        if (file_.empty() || !std::filesystem::exists(file_)) return;
        std::ifstream is(file_);
        nlohmann::json j;
        try {
            is >> j;
        } catch (const nlohmann::json::exception&) {
            return;  // unreadable cache is treated as empty
        }
        std::lock_guard<std::mutex> lk(mu_);
        for (auto it = j.begin(); it != j.end(); ++it) {
            const auto& v = it.value();
            map_[it.key()] = {v.value("re", 0.0), v.value("im", 0.0), v.value("est_error", 0.0)};
        }
    }

    void save() {
        if (file_.empty()) return;
        nlohmann::json j = nlohmann::json::object();
        {
            std::lock_guard<std::mutex> lk(mu_);
            if (!dirty_) return;
            for (const auto& [k, v] : map_) j[k] = {{"re", v.re}, {"im", v.im}, {"est_error", v.est_error}};
            dirty_ = false;
        }
        atomic_write(file_, j.dump(1));
    }

    const std::filesystem::path& file() const { return file_; }

private:
    std::filesystem::path file_;
    mutable std::mutex mu_;
    std::map<std::string, CachedValue> map_;
    bool dirty_ = false;
};

// Process-wide cache used by the potentials module; in-memory unless a file is attached.
inline ElementCache& element_cache() {
    static ElementCache c;
    return c;
}

inline std::unique_ptr<ElementCache>& persistent_cache_slot() {
    static std::unique_ptr<ElementCache> p;
    return p;
}

inline ElementCache& active_cache() {
    auto& p = persistent_cache_slot();
    return p ? *p : element_cache();
}

inline void attach_cache_dir(const std::filesystem::path& dir) {
    persistent_cache_slot() = std::make_unique<ElementCache>(dir / "elements.json");
}

}  // namespace leff
