#include "cli/app.hpp"

int main(int argc, char** argv) { return tunnel::cli::run(argc, argv); }
