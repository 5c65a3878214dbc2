#include <stdio.h>
int live = 0;
class Tracked {
public:
    int id;
    Tracked(int i) : id(i) { live = live + 1; }
    ~Tracked() { live = live - 1; }
};
void scope() {
    Tracked t(7);
    printf("%d %d\n", t.id, live);
}
int main() {
    scope();
    printf("%d\n", live);
    return 0;
}
