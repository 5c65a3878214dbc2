template <class T> T twice(T v) { return v + v; }
