#include "testgen/runtime/generated_test.hpp"

int main(int argc, char** argv) { return testgen::gen::run_registered(argc, argv); }
