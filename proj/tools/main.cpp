#include "cli_app.hpp"

int main(int argc, char** argv) { return padams::cli::run(argc, argv); }
