const int LIMIT = 3;
static int base_value = 10;
struct Point { int x; int y; };
int add(int a, int b) { return a + b; }
template <class T> T twice(T v) { return v + v; }
int main() { printf("%d\n", add(LIMIT, base_value)); }
