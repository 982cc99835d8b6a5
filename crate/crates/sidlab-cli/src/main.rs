fn main() {
    println!("sidlab");
}
