#include <cstdio>

int main() {
    std::puts("maskwm: scaffold");
    return 0;
}
