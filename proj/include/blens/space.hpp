#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace blens {

/// A finite set of labelled outcomes.  Spaces are the objects everything
/// else is indexed by: distributions assign mass to a space's elements,
/// channels map one space's elements to distributions on another.
///
/// Element order is fixed at construction and is the canonical order used
/// for serialization and for flat indexing of product spaces.  Two spaces
/// are considered equal when their element lists coincide — the name is
/// presentation only.
///
/// Products nest to the left and label pairs as "(a,b)"; the flat index of
/// (i, j) is i * |right| + j, which makes (A x B) x C and A x (B x C)
/// literally the same indexed set, so no re-bracketing maps are needed.
class Space {
public:
    Space(std::string name, std::vector<std::string> elements)
        : name_(std::move(name)) {
        if (elements.empty())
            throw Error("Space " + name_ + ": no elements");
        auto idx = std::make_shared<std::unordered_map<std::string, std::size_t>>();
        for (std::size_t i = 0; i < elements.size(); ++i) {
            if (!idx->emplace(elements[i], i).second)
                throw Error("Space " + name_ + ": duplicate element \"" + elements[i] + "\"");
        }
        elems_ = std::make_shared<const std::vector<std::string>>(std::move(elements));
        index_ = std::move(idx);
    }

    /// The product space A (x) B with pair labels "(a,b)".
    static Space product(const Space& a, const Space& b) {
        std::vector<std::string> elems;
        elems.reserve(a.size() * b.size());
        for (const auto& x : a.elements())
            for (const auto& y : b.elements())
                elems.push_back("(" + x + "," + y + ")");
        Space s("(" + a.name() + "*" + b.name() + ")", std::move(elems));
        s.factors_ = std::make_shared<const std::pair<Space, Space>>(a, b);
        return s;
    }

    /// The one-element unit space I = {*}: the codomain of discarding.
    static const Space& unit() {
        static const Space i("I", {"*"});
        return i;
    }

    const std::string& name() const { return name_; }
    const std::vector<std::string>& elements() const { return *elems_; }
    std::size_t size() const { return elems_->size(); }
    const std::string& label(std::size_t i) const { return (*elems_)[i]; }

    std::optional<std::size_t> find(std::string_view label) const {
        auto it = index_->find(std::string(label));
        if (it == index_->end()) return std::nullopt;
        return it->second;
    }

    /// Index of a label; throws UnknownElement when absent.
    std::size_t index_of(std::string_view label) const {
        if (auto i = find(label)) return *i;
        throw UnknownElement("element \"" + std::string(label) + "\" is not in space " + name_);
    }

    bool same_elements(const Space& other) const {
        return elems_ == other.elems_ || *elems_ == *other.elems_;
    }

    friend bool operator==(const Space& a, const Space& b) { return a.same_elements(b); }
    friend bool operator!=(const Space& a, const Space& b) { return !(a == b); }

    bool is_product() const { return static_cast<bool>(factors_); }
    const Space& left() const { return factors().first; }
    const Space& right() const { return factors().second; }

    std::size_t pair_index(std::size_t i, std::size_t j) const {
        return i * right().size() + j;
    }
    std::pair<std::size_t, std::size_t> unpair(std::size_t k) const {
        std::size_t n = right().size();
        return {k / n, k % n};
    }

private:
    const std::pair<Space, Space>& factors() const {
        if (!factors_) throw Error("Space " + name_ + " is not a product");
        return *factors_;
    }

    std::string name_;
    std::shared_ptr<const std::vector<std::string>> elems_;
    std::shared_ptr<const std::unordered_map<std::string, std::size_t>> index_;
    std::shared_ptr<const std::pair<Space, Space>> factors_;
};

} // namespace blens
