#include "prodcons.h"

int pick_request(queue_requests *q, int sem_id) {
    int value;

    Wait_Sem(sem_id, MESSAGE_AVAILABLE);
    Wait_Sem(sem_id, MUTEX_C);

    value = q->buffer[q->head];

    printf("[CONS] pid=%d value=%d pos=%d\n", getpid(), value, q->head);
    fflush(stdout);

    q->head = (q->head + 1) % SIZE;

    Signal_Sem(sem_id, MUTEX_C);
    Signal_Sem(sem_id, SPACE_AVAILABLE);
    return value;
}

void insert_request(queue_requests *q, int sem_id, int value) {
    Wait_Sem(sem_id, SPACE_AVAILABLE);

    Wait_Sem(sem_id, MUTEX_P);

    q->buffer[q->tail] = value;

    printf("[PROD] pid=%d value=%d pos=%d\n", getpid(), value, q->tail);
    fflush(stdout);

    q->tail = (q->tail + 1) % SIZE;

    /* leave the critical section, then notify the consumer */
    Signal_Sem(sem_id, MUTEX_P);
    Signal_Sem(sem_id, MESSAGE_AVAILABLE);
}

queue_requests *initialization(int *sem_out) {
    int shm_id;
    int sem_id;
    queue_requests *q;

    shm_id = shmget(IPC_PRIVATE, sizeof(queue_requests), IPC_CREAT | 0664);
    if (shm_id < 0) {
        perror("shmget");
        exit(1);
    }

    q = (queue_requests *) shmat(shm_id, NULL, 0);
    if (q == (void *) -1) {
        perror("shmat");
        exit(1);
    }
    q->head = 0;
    q->tail = 0;
    q->shm_id = shm_id;

    sem_id = semget(IPC_PRIVATE, 4, IPC_CREAT | 0664);
    if (sem_id < 0) {
        perror("semget");
        exit(1);
    }

    semctl(sem_id, SPACE_AVAILABLE, SETVAL, 10);
    semctl(sem_id, MESSAGE_AVAILABLE, SETVAL, 0);
    semctl(sem_id, MUTEX_P, SETVAL, 1);
    semctl(sem_id, MUTEX_C, SETVAL, 1);

    *sem_out = sem_id;
    return q;
}

void removal(queue_requests *q, int sem_id) {
    int shm_id = q->shm_id;

    shmdt(q);
    shmctl(shm_id, IPC_RMID, NULL);
    semctl(sem_id, 0, IPC_RMID);
}

void producer(queue_requests *q, int sem_id) {
    int i;

    srand(getpid());
    for (i = 0; i < REQUESTS_PER_PRODUCER; i++) {
        int value = rand() % 100;
        insert_request(q, sem_id, value);
    }
}

void consumer(queue_requests *q, int sem_id) {
    int i;

    for (i = 0; i < NUM_PRODUCERS * REQUESTS_PER_PRODUCER; i++) {
        pick_request(q, sem_id);
    }
}

int main(void) {
    int sem_id;
    int i;
    pid_t pid;
    queue_requests *q;

    setvbuf(stdout, NULL, _IOLBF, 0);

    q = initialization(&sem_id);

    for (i = 0; i < NUM_PRODUCERS; i++) {
        pid = fork();
        if (pid < 0) {
            perror("fork");
            exit(1);
        }
        if (pid == 0) {
            producer(q, sem_id);
            exit(0);
        }
    }

    pid = fork();
    if (pid < 0) {
        perror("fork");
        exit(1);
    }
    if (pid == 0) {
        consumer(q, sem_id);
        exit(0);
    }

    for (i = 0; i < NUM_PRODUCERS + 1; i++) {
        wait(NULL);
    }

    removal(q, sem_id);
    return 0;
}
