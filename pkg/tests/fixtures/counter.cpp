#include <stdio.h>
int g = 5;
void bump() { g = g + 1; }
int main() {
    bump();
    bump();
    printf("%d\n", g);
    return 0;
}
