#include <cstdio>
int main() {
    std::puts("edgetran: not yet implemented");
    return 1;
}
