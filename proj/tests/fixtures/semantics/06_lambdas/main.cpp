#include <algorithm>
#include <cctype>
#include <iostream>
#include <string>
#include <vector>

// @GenerateTestCases
std::vector<int> sorted_by_distance(std::vector<int> v, int pivot) {
  auto dist = [pivot](int x) { return x > pivot ? x - pivot : pivot - x; };
  std::stable_sort(v.begin(), v.end(), [&](int a, int b) { return dist(a) < dist(b); });
  return v;
}

// @GenerateTestCases
int count_if_long(const std::vector<std::string>& words, std::size_t min_len) {
  struct Pred {
    std::size_t n;
    bool operator()(const std::string& w) const { return w.size() >= n; }
  };
  return static_cast<int>(std::count_if(words.begin(), words.end(), Pred{min_len}));
}

int main() {
  std::vector<int> nums;
  std::vector<std::string> words;
  for (std::string w; std::cin >> w;) {
    if (std::isdigit(static_cast<unsigned char>(w[0]))) {
      nums.push_back(std::stoi(w));
    } else {
      words.push_back(w);
    }
  }
  for (int x : sorted_by_distance(nums, 10)) std::cout << x << " ";
  std::cout << "\nlong words " << count_if_long(words, 5) << "\n";
}
