// Drives the transpiled bool-array unit; the module path is filled in by the test.
#[path = "{module}"]
mod bool_array;

fn main() {
    let mut bits = bool_array::Bool_Array::new(16);
    let first = bits.set_bit(3);
    let second = bits.set_bit(3);
    bits.clear();
    let after_clear = bits.set_bit(3);
    println!("{} {} {}", first, second, after_clear);
}
