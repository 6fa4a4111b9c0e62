#include "cli.hpp"

int main(int argc, char** argv) { return paramosc::cli::run(argc, argv); }
