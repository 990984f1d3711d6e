#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace dynmap::nn {

class NnError : public std::runtime_error {
  public:
    explicit NnError(const std::string& what) : std::runtime_error(what) {}
};

// Dense row-major float32 tensor.
struct Tensor {
    std::vector<int> shape;
    std::vector<float> v;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)), v(count(shape), 0.0f) {}
    Tensor(std::vector<int> s, std::vector<float> data) : shape(std::move(s)), v(std::move(data)) {
        if (static_cast<size_t>(count(shape)) != v.size())
            throw NnError("tensor data size does not match shape");
    }

    static int count(const std::vector<int>& s) {
        int n = 1;
        for (int d : s) n *= d;
        return n;
    }
    int numel() const { return static_cast<int>(v.size()); }

    float& operator[](int i) { return v[static_cast<size_t>(i)]; }
    float operator[](int i) const { return v[static_cast<size_t>(i)]; }

    static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }
    static Tensor scalar(float x) { return Tensor({1}, {x}); }

    void fill(float x) { std::fill(v.begin(), v.end(), x); }
};

struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;

    Parameter() = default;
    Parameter(std::string n, Tensor t) : name(std::move(n)), value(std::move(t)) {
        grad = Tensor(value.shape);
    }
    void zero_grad() { grad.fill(0.0f); }
};

// Owns parameters with stable addresses; names must be unique.
class ParamSet {
  public:
    Parameter& add(const std::string& name, Tensor init);
    Parameter& at(const std::string& name);
    const Parameter& at(const std::string& name) const;
    bool contains(const std::string& name) const;
    std::vector<Parameter*> all();
    std::vector<const Parameter*> all() const;
    void zero_grads();
    size_t size() const { return params_.size(); }

  private:
    std::vector<std::unique_ptr<Parameter>> params_;
};

}  // namespace dynmap::nn
