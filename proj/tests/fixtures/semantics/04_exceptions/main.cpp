#include <iostream>
#include <stdexcept>
#include <string>

// @GenerateTestCases
int parse_digit(const std::string& s) {
  if (s.size() != 1) throw std::invalid_argument("not a single character: " + s);
  if (s[0] < '0' || s[0] > '9') throw std::out_of_range("not a digit: " + s);
  return s[0] - '0';
}

// @GenerateTestCases
int checked_sum(int total, const std::string& token) {
  try {
    return total + parse_digit(token);
  } catch (const std::out_of_range&) {
    return total;
  }
}

int main() {
  int total = 0;
  std::string tok;
  while (std::cin >> tok) {
    try {
      total = checked_sum(total, tok);
      std::cout << "total " << total << "\n";
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 4;
    }
  }
  return 0;
}
